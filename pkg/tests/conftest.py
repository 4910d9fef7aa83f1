import random

import pytest


class ReferenceMajority:
    """Simple dict-based reference for the grouped majority structure.

    Same stream semantics: increment if monitored, claim a zero counter
    otherwise (evicting the zero-valued item whose last level entry is the
    oldest, which is the order the linked structure keeps), else decrement
    every counter.  O(c) per element, used only as a test oracle.
    """

    def __init__(self, c: int):
        self.c = c
        self.counts: dict = {}
        self.entry: dict = {}
        self.seq = 0
        self.free = c

    def _bump(self, item) -> None:
        self.seq += 1
        self.entry[item] = self.seq

    def offer(self, item) -> None:
        if item in self.counts:
            self.counts[item] += 1
            self._bump(item)
            return
        if self.free:
            self.free -= 1
            self.counts[item] = 1
            self._bump(item)
            return
        zeros = [k for k, v in self.counts.items() if v == 0]
        if zeros:
            victim = min(zeros, key=lambda k: self.entry[k])
            del self.counts[victim]
            del self.entry[victim]
            self.counts[item] = 1
            self._bump(item)
            return
        for k in self.counts:
            self.counts[k] -= 1


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xB01)


def make_document(
    preamble: list[str], body: list[str], epilogue: list[str] | None = None
) -> str:
    lines = list(preamble) + [""] + list(body)
    if epilogue:
        lines += [""] + list(epilogue)
    return "\n".join(lines) + "\n"
