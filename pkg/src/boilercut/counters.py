"""Frequent-line data structures behind one two-pass interface.

Pass 1 records normalized lines with :meth:`FrequencyStore.record`; after
:meth:`FrequencyStore.seal` the store becomes a read-only oracle answering
:meth:`FrequencyStore.is_frequent`.  Four backends trade memory for accuracy:

* ``ExactCountStore`` -- a plain hash map from line text to count.
* ``Crc64CountStore`` -- counts per 64-bit checksum, one tenth the memory,
  wrong only on checksum collisions.
* ``HashCounterStore`` -- a flat array of 2**k saturating counters indexed by
  the low k bits of the checksum; one-sided error (false positives only).
  Optionally counts probabilistically (Morris-style) to stretch 8-bit cells.
* ``MisraGriesStore`` -- deterministic streaming heavy-hitter tracking with a
  fixed budget of c counters; every item occurring more than n/(c+1) times in
  an n-item stream is still monitored at the end.
"""

from __future__ import annotations

import json
import random
from array import array
from collections import Counter
from pathlib import Path
from typing import Iterable, Sequence

DEFAULT_FREQUENT_THRESHOLD = 10
DEFAULT_HASH_BITS = 23
DEFAULT_COUNTER_WIDTH = 8
DEFAULT_MAJORITY_COUNTERS = 100_000
DEFAULT_MAJORITY_THRESHOLD = 5

# CRC-64/ECMA-182: polynomial 0x42F0E1EBA9EA3693, init 0, not reflected,
# no final xor.  crc64(b"123456789") == 0x6C40DF5F0B497347.
CRC64_POLYNOMIAL = 0x42F0E1EBA9EA3693
_MASK64 = 0xFFFFFFFFFFFFFFFF


def _build_crc_table() -> tuple[int, ...]:
    table = []
    for byte in range(256):
        crc = byte << 56
        for _ in range(8):
            if crc & (1 << 63):
                crc = ((crc << 1) ^ CRC64_POLYNOMIAL) & _MASK64
            else:
                crc = (crc << 1) & _MASK64
        table.append(crc)
    return tuple(table)


_CRC_TABLE = _build_crc_table()


def crc64(data: bytes | str) -> int:
    """Table-driven CRC-64/ECMA-182 of a byte string (str encodes as Latin-1)."""
    if isinstance(data, str):
        data = data.encode("latin-1")
    crc = 0
    table = _CRC_TABLE
    for byte in data:
        crc = table[(crc >> 56) ^ byte] ^ ((crc << 8) & _MASK64)
    return crc


def morris_increment(counter: int, sample: float) -> int:
    """Advance a probabilistic counter: increment with probability 2**-counter.

    ``sample`` is a uniform draw from [0, 1).  A counter at 0 always advances.
    """
    if counter < 0:
        raise ValueError("counter must be non-negative")
    if sample < 2.0 ** -counter:
        return counter + 1
    return counter


def morris_estimate(counter: int) -> int:
    """Unbiased count estimate for a probabilistic counter: 2**counter - 1."""
    if counter < 0:
        raise ValueError("counter must be non-negative")
    return (1 << counter) - 1


class StoreStateError(RuntimeError):
    """Raised when a store is used on the wrong side of seal()."""


class FrequencyStore:
    """Base class for the pass-1/pass-2 counting contract."""

    def __init__(self, threshold: int = DEFAULT_FREQUENT_THRESHOLD):
        if threshold < 1:
            raise ValueError("threshold must be at least 1")
        self.threshold = threshold
        self._sealed = False

    @property
    def sealed(self) -> bool:
        return self._sealed

    def record(self, text: str) -> None:
        """Record one occurrence of a normalized line (pass 1 only)."""
        if self._sealed:
            raise StoreStateError("cannot record into a sealed store")
        self._record(text)

    def seal(self) -> None:
        """Freeze the store; queries are allowed only after sealing."""
        if not self._sealed:
            self._seal()
            self._sealed = True

    def is_frequent(self, text: str) -> bool:
        """Pure query: was this line recorded at least ``threshold`` times?"""
        if not self._sealed:
            raise StoreStateError("store must be sealed before querying")
        return self._is_frequent(text)

    def merge(self, other: "FrequencyStore") -> None:
        """Fold another unsealed store of the same type into this one."""
        if self._sealed or other._sealed:
            raise StoreStateError("merge requires both stores unsealed")
        if type(other) is not type(self):
            raise TypeError(f"cannot merge {type(other).__name__} into {type(self).__name__}")
        self._merge(other)

    def _record(self, text: str) -> None:
        raise NotImplementedError

    def _seal(self) -> None:
        pass

    def _is_frequent(self, text: str) -> bool:
        raise NotImplementedError

    def _merge(self, other: "FrequencyStore") -> None:
        raise NotImplementedError


class ExactCountStore(FrequencyStore):
    """Exact in-memory counts keyed by full line text."""

    def __init__(self, threshold: int = DEFAULT_FREQUENT_THRESHOLD):
        super().__init__(threshold)
        self.counts: Counter[str] = Counter()

    def _record(self, text: str) -> None:
        self.counts[text] += 1

    def _is_frequent(self, text: str) -> bool:
        return self.counts.get(text, 0) >= self.threshold

    def _merge(self, other: "ExactCountStore") -> None:
        self.counts.update(other.counts)

    def frequent_lines(self) -> list[tuple[int, str]]:
        """All (count, text) pairs at or above the threshold, sorted by text."""
        return sorted(
            ((count, text) for text, count in self.counts.items() if count >= self.threshold),
            key=lambda pair: pair[1],
        )


class Crc64CountStore(FrequencyStore):
    """Exact counts keyed by CRC-64 of the line text."""

    def __init__(self, threshold: int = DEFAULT_FREQUENT_THRESHOLD):
        super().__init__(threshold)
        self.counts: Counter[int] = Counter()

    def _record(self, text: str) -> None:
        self.counts[crc64(text)] += 1

    def _is_frequent(self, text: str) -> bool:
        return self.counts.get(crc64(text), 0) >= self.threshold

    def _merge(self, other: "Crc64CountStore") -> None:
        self.counts.update(other.counts)

    def frequent_keys(self) -> list[tuple[int, int]]:
        """All (count, key) pairs at or above the threshold, sorted by key."""
        return sorted(
            ((count, key) for key, count in self.counts.items() if count >= self.threshold),
            key=lambda pair: pair[1],
        )


class HashCounterStore(FrequencyStore):
    """A flat array of saturating counters indexed by a k-bit line hash.

    The index is the low ``hash_bits`` bits of the CRC-64 checksum, so the
    whole pipeline shares one hashing scheme.  Colliding lines share a
    counter: every truly frequent line is reported frequent, and collisions
    can only add false positives.  With ``morris=True`` cells hold
    probabilistic counters instead of saturating ones.
    """

    def __init__(
        self,
        threshold: int = DEFAULT_FREQUENT_THRESHOLD,
        hash_bits: int = DEFAULT_HASH_BITS,
        counter_width: int = DEFAULT_COUNTER_WIDTH,
        morris: bool = False,
        seed: int = 0,
    ):
        super().__init__(threshold)
        if not 1 <= hash_bits <= 32:
            raise ValueError("hash_bits must be in 1..32")
        if not 1 <= counter_width <= 32:
            raise ValueError("counter_width must be in 1..32")
        self.hash_bits = hash_bits
        self.counter_width = counter_width
        self.morris = morris
        self.seed = seed
        self._mask = (1 << hash_bits) - 1
        self._cap = (1 << counter_width) - 1
        if counter_width == 8:
            self._cells: bytearray | array = bytearray(1 << hash_bits)
        else:
            self._cells = array("Q", bytes(8 * (1 << hash_bits)))
        self._rng = random.Random(seed)

    def _index(self, text: str) -> int:
        return crc64(text) & self._mask

    def _record(self, text: str) -> None:
        index = self._index(text)
        current = self._cells[index]
        if self.morris:
            sample = self._rng.random()
            if current < self._cap:
                self._cells[index] = morris_increment(current, sample)
        elif current < self._cap:
            self._cells[index] = current + 1

    def _is_frequent(self, text: str) -> bool:
        value = self._cells[self._index(text)]
        if self.morris:
            return morris_estimate(value) >= self.threshold
        return value >= self.threshold

    def _merge(self, other: "HashCounterStore") -> None:
        if (self.hash_bits, self.counter_width, self.morris) != (
            other.hash_bits,
            other.counter_width,
            other.morris,
        ):
            raise ValueError("cannot merge hash counter stores with different layouts")
        if self.morris:
            # Probabilistic cells hold exponents; summing them is meaningless.
            raise ValueError("morris counters do not support merging")
        cap = self._cap
        for index, value in enumerate(other._cells):
            if value:
                self._cells[index] = min(cap, self._cells[index] + value)

    def frequent_cells(self) -> list[tuple[int, int]]:
        """All (value, index) pairs whose cell crosses the threshold."""
        result = []
        for index, value in enumerate(self._cells):
            estimate = morris_estimate(value) if self.morris else value
            if estimate >= self.threshold:
                result.append((value, index))
        return result


class _Node:
    __slots__ = ("item", "group", "prev", "next")

    def __init__(self, item):
        self.item = item
        self.group: "_Group" | None = None
        self.prev: "_Node" | None = None
        self.next: "_Node" | None = None


class _Group:
    # Counters sharing one value.  ``delta`` is the difference to the previous
    # group's value; for the first group it is the absolute value.
    __slots__ = ("delta", "first", "last", "prev", "next")

    def __init__(self, delta: int):
        self.delta = delta
        self.first: _Node | None = None
        self.last: _Node | None = None
        self.prev: "_Group" | None = None
        self.next: "_Group" | None = None


class MisraGriesStore(FrequencyStore):
    """Deterministic heavy-hitter tracking with a fixed budget of counters.

    Each stream element either increments its own counter, claims a zero
    counter (evicting whatever that counter monitored before), or -- when
    every counter is positive -- decrements all counters at once.  Groups of
    equal-valued counters are kept in a linked list with value differences on
    the links, so increment, adoption, and decrement-all are each O(1) and
    the whole stream costs O(1) amortized per element.

    A sealed store reports a line frequent when it is still monitored with a
    residual counter at or above ``report_threshold`` (decrements mean this
    threshold is not a plain occurrence count).  With ``store_keys=True`` the
    structure monitors CRC-64 checksums instead of full line texts.
    """

    def __init__(
        self,
        counters: int = DEFAULT_MAJORITY_COUNTERS,
        report_threshold: int = DEFAULT_MAJORITY_THRESHOLD,
        store_keys: bool = False,
    ):
        super().__init__(report_threshold)
        if counters < 1:
            raise ValueError("need at least one counter")
        self.counters = counters
        self.report_threshold = report_threshold
        self.store_keys = store_keys
        self._free = counters
        self._nodes: dict = {}
        self._head: _Group | None = None
        self._counts: dict | None = None

    # -- linked-structure plumbing -------------------------------------------

    def _remove_group(self, group: _Group) -> None:
        if group.next is not None:
            group.next.delta += group.delta
            group.next.prev = group.prev
        if group.prev is not None:
            group.prev.next = group.next
        else:
            self._head = group.next

    def _detach(self, node: _Node) -> None:
        group = node.group
        if node.prev is not None:
            node.prev.next = node.next
        else:
            group.first = node.next
        if node.next is not None:
            node.next.prev = node.prev
        else:
            group.last = node.prev
        node.prev = node.next = None
        node.group = None
        if group.first is None:
            self._remove_group(group)

    def _append(self, group: _Group, node: _Node) -> None:
        node.group = group
        node.prev = group.last
        node.next = None
        if group.last is not None:
            group.last.next = node
        else:
            group.first = node
        group.last = node

    def _insert_group_after(self, prev: _Group | None, delta: int) -> _Group:
        group = _Group(delta)
        if prev is None:
            group.next = self._head
            if self._head is not None:
                self._head.prev = group
            self._head = group
        else:
            group.next = prev.next
            group.prev = prev
            if prev.next is not None:
                prev.next.prev = group
            prev.next = group
        if group.next is not None:
            group.next.delta -= delta
        return group

    def _place_at_one(self, node: _Node) -> None:
        head = self._head
        if head is not None and head.delta == 0:
            # a zero-valued group exists; value 1 sits just after it
            follower = head.next
            if follower is not None and follower.delta == 1:
                self._append(follower, node)
            else:
                self._append(self._insert_group_after(head, 1), node)
        elif head is not None and head.delta == 1:
            self._append(head, node)
        else:
            self._append(self._insert_group_after(None, 1), node)

    def _promote(self, node: _Node, amount: int) -> None:
        # Move a node up by ``amount`` without touching other values.
        group = node.group
        position = group
        remaining = amount
        while position.next is not None and position.next.delta <= remaining:
            remaining -= position.next.delta
            position = position.next
        if remaining == 0:
            target = position
        else:
            target = self._insert_group_after(position, remaining)
        if target is group:
            return
        self._detach(node)
        self._append(target, node)

    def _adopt(self, item, weight: int = 1) -> None:
        node = _Node(item)
        self._nodes[item] = node
        self._place_at_one(node)
        if weight > 1:
            self._promote(node, weight - 1)

    # -- algorithm steps ------------------------------------------------------

    def _key(self, text: str):
        return crc64(text) if self.store_keys else text

    def offer(self, text: str, weight: int = 1) -> None:
        """Feed one stream element (``weight`` > 1 repeats it back to back)."""
        if self._sealed:
            raise StoreStateError("cannot record into a sealed store")
        if weight < 1:
            raise ValueError("weight must be positive")
        self._offer_key(self._key(text), weight)

    def _record(self, text: str) -> None:
        self.offer(text)

    def monitored_counts(self) -> dict:
        """Current counter value for every monitored item."""
        if self._counts is not None:
            return dict(self._counts)
        counts = {}
        value = 0
        group = self._head
        while group is not None:
            value += group.delta
            node = group.first
            while node is not None:
                counts[node.item] = value
                node = node.next
            group = group.next
        return counts

    def top(self, m: int) -> list[tuple]:
        """The m monitored items with the largest counters.

        Ties break by item order so the answer is stable across runs; asking
        for more items than are monitored returns them all.
        """
        counts = self.monitored_counts()
        ranked = sorted(counts.items(), key=lambda pair: (-pair[1], pair[0]))
        return ranked[:m]

    def _seal(self) -> None:
        self._counts = self.monitored_counts()
        self._nodes.clear()
        self._head = None

    def _is_frequent(self, text: str) -> bool:
        count = self._counts.get(self._key(text))
        return count is not None and count >= self.report_threshold

    def _merge(self, other: "MisraGriesStore") -> None:
        # Replaying monitored items weighted by their residual counters is an
        # approximation: decrement interleaving differs from the true stream.
        if self.store_keys != other.store_keys:
            raise ValueError("cannot merge key-storing and text-storing structures")
        replay = sorted(other.monitored_counts().items(), key=lambda pair: (-pair[1], pair[0]))
        for item, count in replay:
            if count > 0:
                self._offer_key(item, count)
        # items monitored at zero carry no weight and are dropped

    def _offer_key(self, item, weight: int) -> None:
        while weight > 0:
            node = self._nodes.get(item)
            if node is not None:
                self._promote(node, weight)
                return
            if self._free > 0:
                self._free -= 1
                self._adopt(item, weight)
                return
            head = self._head
            if head.delta == 0:
                victim = head.first
                self._detach(victim)
                del self._nodes[victim.item]
                self._adopt(item, weight)
                return
            # every counter is positive: decrement all of them at once
            step = min(head.delta, weight)
            head.delta -= step
            weight -= step


class FrozenFrequentSet:
    """A read-only frequency oracle loaded from a saved index.

    ``key_kind`` selects how a queried line maps onto the stored set:
    full text, CRC-64 checksum, or a k-bit hash cell index.
    """

    def __init__(self, members: Iterable, key_kind: str = "text",
                 hash_bits: int = DEFAULT_HASH_BITS, threshold: int = DEFAULT_FREQUENT_THRESHOLD):
        if key_kind not in ("text", "crc64", "cell"):
            raise ValueError(f"unknown key kind: {key_kind!r}")
        self.key_kind = key_kind
        self.hash_bits = hash_bits
        self.threshold = threshold
        self._members = frozenset(members)
        self._mask = (1 << hash_bits) - 1

    @property
    def sealed(self) -> bool:
        return True

    def record(self, text: str) -> None:
        raise StoreStateError("frozen frequent sets are read-only")

    def seal(self) -> None:
        pass

    def is_frequent(self, text: str) -> bool:
        if self.key_kind == "text":
            return text in self._members
        key = crc64(text)
        if self.key_kind == "crc64":
            return key in self._members
        return (key & self._mask) in self._members


# -- interchange formats -------------------------------------------------------


def write_frequent_lines(path: Path | str, items: Sequence[tuple[int, str]]) -> None:
    """Write (count, line) records as ``count<TAB>line`` sorted by line text."""
    ordered = sorted(items, key=lambda pair: pair[1])
    with open(path, "w", encoding="latin-1", newline="\n") as handle:
        for count, text in ordered:
            handle.write(f"{count}\t{text}\n")


def read_frequent_lines(path: Path | str) -> list[tuple[int, str]]:
    """Read ``count<TAB>line`` records written by :func:`write_frequent_lines`."""
    items = []
    with open(path, "r", encoding="latin-1", newline="\n") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line:
                continue
            count, text = line.split("\t", 1)
            items.append((int(count), text))
    return items


def save_index(store: FrequencyStore, path: Path | str) -> None:
    """Persist the frequent set of a built store for later pass-2 reuse."""
    if isinstance(store, ExactCountStore):
        meta = {"key": "text", "threshold": store.threshold}
        records = [(count, text) for count, text in store.frequent_lines()]
    elif isinstance(store, Crc64CountStore):
        meta = {"key": "crc64", "threshold": store.threshold}
        records = [(count, f"{key:016x}") for count, key in store.frequent_keys()]
    elif isinstance(store, HashCounterStore):
        meta = {"key": "cell", "threshold": store.threshold, "hash_bits": store.hash_bits}
        records = [(value, str(index)) for value, index in store.frequent_cells()]
    elif isinstance(store, MisraGriesStore):
        counts = store.monitored_counts()
        survivors = [
            (count, f"{item:016x}" if store.store_keys else item)
            for item, count in counts.items()
            if count >= store.report_threshold
        ]
        meta = {
            "key": "crc64" if store.store_keys else "text",
            "threshold": store.report_threshold,
        }
        records = sorted(survivors, key=lambda pair: pair[1])
    else:
        raise TypeError(f"cannot save index for {type(store).__name__}")
    with open(path, "w", encoding="latin-1", newline="\n") as handle:
        handle.write(json.dumps(meta, sort_keys=True) + "\n")
        for count, key in sorted(records, key=lambda pair: pair[1]):
            handle.write(f"{count}\t{key}\n")


def load_index(path: Path | str) -> FrozenFrequentSet:
    """Load a saved index as a read-only oracle."""
    with open(path, "r", encoding="latin-1", newline="\n") as handle:
        meta = json.loads(handle.readline())
        members = []
        for line in handle:
            line = line.rstrip("\n")
            if not line:
                continue
            _, key = line.split("\t", 1)
            if meta["key"] == "crc64":
                members.append(int(key, 16))
            elif meta["key"] == "cell":
                members.append(int(key))
            else:
                members.append(key)
    return FrozenFrequentSet(
        members,
        key_kind=meta["key"],
        hash_bits=meta.get("hash_bits", DEFAULT_HASH_BITS),
        threshold=meta.get("threshold", DEFAULT_FREQUENT_THRESHOLD),
    )


_BACKENDS = ("exact", "crc64", "kbit", "misra-gries")


def make_store(
    backend: str,
    threshold: int = DEFAULT_FREQUENT_THRESHOLD,
    hash_bits: int = DEFAULT_HASH_BITS,
    counter_width: int = DEFAULT_COUNTER_WIDTH,
    morris: bool = False,
    seed: int = 0,
    mg_counters: int = DEFAULT_MAJORITY_COUNTERS,
    mg_threshold: int = DEFAULT_MAJORITY_THRESHOLD,
    mg_store_keys: bool = False,
) -> FrequencyStore:
    """Build a counting backend by name (one of exact, crc64, kbit, misra-gries)."""
    if backend == "exact":
        return ExactCountStore(threshold)
    if backend == "crc64":
        return Crc64CountStore(threshold)
    if backend == "kbit":
        return HashCounterStore(threshold, hash_bits, counter_width, morris, seed)
    if backend in ("misra-gries", "mg"):
        return MisraGriesStore(mg_counters, mg_threshold, mg_store_keys)
    raise ValueError(f"unknown backend {backend!r}; expected one of {', '.join(_BACKENDS)}")
