"""Closed forms and simulations for the detector's error behaviour.

The gap scan is a run of Bernoulli trials: how long until ``gap_max``
consecutive misses, how many extra lines does a false-positive rate cost,
how likely is an early cut.  The hash-counter backend adds collision
questions: how likely is a line to share a cell with another, and how does
that bound the false-positive rate.  Every stochastic routine takes an
explicit seed and derives one sub-seed per trial, so results do not depend
on execution order.
"""

from __future__ import annotations

import math
import random
from collections import Counter

from .counters import ExactCountStore, MisraGriesStore


def expected_run_time(p: float, n: int) -> float:
    """Expected number of flips before a run of n heads, heads probability p.

    Equals sum_{i=1..n} p**-i; summed smallest term first for stability.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError("p must be in (0, 1]; p=0 makes the expectation infinite")
    if n < 1:
        raise ValueError("run length must be at least 1")
    return sum(p ** -i for i in range(1, n + 1))


def simulate_run_time(p: float, n: int, trials: int, seed: int = 0) -> float:
    """Monte-Carlo mean of the flips needed to see n consecutive heads.

    Each trial runs on its own generator seeded ``seed + trial`` so the mean
    is reproducible and trials could be distributed without changing it.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError("p must be in (0, 1]")
    if n < 1 or trials < 1:
        raise ValueError("run length and trial count must be at least 1")
    total = 0
    for trial in range(trials):
        rng = random.Random(seed + trial)
        run = 0
        flips = 0
        while run < n:
            flips += 1
            if rng.random() < p:
                run += 1
            else:
                run = 0
        total += flips
    return total / trials


def expected_overshoot(p_fp: float, gap_max: int) -> float:
    """Expected body lines misclassified past the true boundary.

    With false positives at rate ``p_fp``, the scan runs past the boundary
    until ``gap_max`` consecutive true negatives appear, then backs off by
    ``gap_max``: sum_{k=1..gap_max} (1-p_fp)**-k - gap_max.
    """
    if not 0.0 <= p_fp < 1.0:
        raise ValueError("false-positive rate must be in [0, 1)")
    if gap_max < 1:
        raise ValueError("gap_max must be at least 1")
    return sum((1.0 - p_fp) ** -k for k in range(1, gap_max + 1)) - gap_max


def early_cut_probability(sigma: float, length: int, gap_max: int) -> float:
    """Union bound on cutting a boilerplate block short: length * sigma**gap_max.

    ``sigma`` is the false-negative rate; the bound can exceed 1 for extreme
    inputs and is reported as computed.
    """
    if not 0.0 <= sigma <= 1.0:
        raise ValueError("sigma must be in [0, 1]")
    if length < 0 or gap_max < 1:
        raise ValueError("invalid length or gap_max")
    return length * sigma ** gap_max


def fp_bound_crude(n_distinct: int, cells: int) -> float:
    """Upper bound on hash-cell false positives: P(any other line shares).

    1 - exp(-(n-1)/c) for n distinct lines spread over c cells.
    """
    if n_distinct < 1 or cells < 1:
        raise ValueError("need at least one line and one cell")
    return 1.0 - math.exp(-(n_distinct - 1) / cells)


def fp_bound_skewed(n_distinct: int, cells: int, p_heavy: float) -> float:
    """Sharper false-positive bound for heavily skewed line frequencies.

    If a random co-hashed line pushes the cell over the threshold with
    probability at most ``p_heavy``, the false-positive rate is bounded by
    p_heavy * (n-1)/c (the expected number of co-hashed lines times p).
    """
    if n_distinct < 1 or cells < 1:
        raise ValueError("need at least one line and one cell")
    if not 0.0 <= p_heavy <= 1.0:
        raise ValueError("p_heavy must be in [0, 1]")
    return p_heavy * (n_distinct - 1) / cells


def occurrence_histogram(
    store: ExactCountStore, weight: str = "occurrence"
) -> tuple[dict[int, int], dict[int, float]]:
    """Histogram of line multiplicities plus the tail distribution P(X >= k).

    The histogram maps occurrence count to the number of distinct lines with
    that count.  The tail is occurrence-weighted by default (the probability
    that a randomly picked line occurrence belongs to a line with at least k
    occurrences); ``weight="distinct"`` weights every distinct line equally.
    """
    if weight not in ("occurrence", "distinct"):
        raise ValueError(f"unknown weighting {weight!r}")
    histogram: Counter[int] = Counter()
    for count in store.counts.values():
        histogram[count] += 1
    tail: dict[int, float] = {}
    if not histogram:
        return {}, {}
    if weight == "occurrence":
        total = sum(count * lines for count, lines in histogram.items())
        mass = lambda count, lines: count * lines
    else:
        total = sum(histogram.values())
        mass = lambda count, lines: lines
    running = 0.0
    for count in sorted(histogram, reverse=True):
        running += mass(count, histogram[count])
        tail[count] = running / total
    # fill tail for every k down to 1: P is flat between observed counts
    filled: dict[int, float] = {}
    previous = 0.0
    for k in range(max(histogram), 0, -1):
        previous = tail.get(k, previous)
        filled[k] = previous
    return dict(histogram), dict(sorted(filled.items()))


def zipf_quotas(x: float, n_items: int, n_distinct: int) -> list[int]:
    """Deterministic occurrence quotas: rank r gets round(n_items * w_r).

    Weights follow w_r proportional to 1/r**x; ranks whose quota rounds to
    zero simply do not appear in the stream.
    """
    if n_distinct < 1 or n_items < 1:
        raise ValueError("need at least one item and one rank")
    weights = [rank ** -x if x else 1.0 for rank in range(1, n_distinct + 1)]
    total = sum(weights)
    return [round(n_items * w / total) for w in weights]


def _largest_exact_top_k(
    true_counts: dict[str, int], ranked_monitored: list[tuple[str, int]], budget: int
) -> int:
    # True ranking uses the same deterministic tie-break as the structure's
    # top query (count descending, then item ascending).
    true_order = sorted(true_counts, key=lambda item: (-true_counts[item], item))
    monitored_order = [item for item, _ in ranked_monitored]
    best = 0
    for k in range(1, min(budget, len(monitored_order), len(true_order)) + 1):
        if set(monitored_order[:k]) == set(true_order[:k]):
            best = k
    return best


def zipf_gm_efficiency(
    x: float,
    n_items: int = 100_000,
    n_distinct: int = 1000,
    c: int = 30,
    trials: int = 30,
    seed: int = 0,
) -> float:
    """Mean top-k efficiency of the majority structure on Zipfian streams.

    Per trial: build the quota stream for skew ``x``, shuffle it with a
    trial-derived seed, feed it to a ``c``-counter structure, and find the
    largest k for which the structure's top-k query returns exactly the true
    top-k set.  Efficiency is that k over c, averaged across trials.
    """
    if c > n_distinct:
        raise ValueError("counter budget exceeds the item universe")
    if trials < 1:
        raise ValueError("need at least one trial")
    quotas = zipf_quotas(x, n_items, n_distinct)
    width = max(4, len(str(n_distinct)))
    items = [f"{rank:0{width}d}" for rank in range(1, n_distinct + 1)]
    true_counts = {item: quota for item, quota in zip(items, quotas) if quota > 0}
    base_stream = [item for item, quota in true_counts.items() for _ in range(quota)]
    total = 0.0
    for trial in range(trials):
        rng = random.Random(seed + trial)
        stream = base_stream[:]
        rng.shuffle(stream)
        tracker = MisraGriesStore(counters=c, report_threshold=1)
        for item in stream:
            tracker.offer(item)
        total += _largest_exact_top_k(true_counts, tracker.top(c), c) / c
    return total / trials
