"""Boundary detection: where does the preamble end and the epilogue start.

The scan works on the non-trivial normalized window of a file and asks a
frequency oracle about each line.  Boilerplate shows up as a run of frequent
lines broken only by small gaps; a gap of ``gap_max`` consecutive infrequent
lines ends the region.  The forward scan first skips ahead to the first
frequent line; the backward scan starts counting its gap at the file end, so
an epilogue must begin within ``gap_max`` non-trivial lines of the end.
Reported boundaries are raw line indices: trivial lines after the last
frequent line belong to the body.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .preprocess import (
    DEFAULT_BOTTOM_WINDOW,
    DEFAULT_TOP_WINDOW,
    NormalizedLine,
    RawLine,
    extract_window,
)

DEFAULT_GAP_MAX = 10

PREAMBLE_MARKER = "preamble_marker"
EPILOGUE_MARKER = "epilogue_marker"

# Marker patterns for hand-typed boilerplate near the file edges.  The
# epilogue pattern tolerates filler words around "End ... Project Gutenberg"
# because those lines were retyped with every capitalization imaginable.
_PREAMBLE_RE = re.compile(
    r"[\s*]*\*\s?(?:START\s+OF\s+(?:THE|THIS)\s+PROJECT\s+GUTENBERG"
    r"|END[\s*]+THE\s+SMALL\s+PRINT!)"
)
_EPILOGUE_RE = re.compile(
    r"(?:This|THIS|this|Is|IS|is|The|THE|the|Of|OF|of|\*|\s)*"
    r"(?:End|END|end)"
    r"(?:\s|Of|OF|of|The|THE|the|This|THIS|this)*"
    r"(?:Project\s+Gutenberg|PROJECT\s+GUTENBERG)"
)


@dataclass(frozen=True)
class DetectorConfig:
    """Scan constants: gap tolerance, window sizes, heuristic switch."""

    gap_max: int = DEFAULT_GAP_MAX
    p_max: int = DEFAULT_TOP_WINDOW
    e_max: int = DEFAULT_BOTTOM_WINDOW
    heuristics_enabled: bool = True

    def __post_init__(self):
        if self.gap_max < 1:
            raise ValueError("gap_max must be at least 1")
        if self.p_max < 1 or self.e_max < 1:
            raise ValueError("window sizes must be at least 1")


@dataclass(frozen=True)
class BoundaryReport:
    """Detected boilerplate boundaries for one file, in raw line indices.

    ``preamble_end`` is the last preamble line, ``epilogue_start`` the first
    epilogue line; both are inclusive and None when that side was not found.
    """

    file_id: str
    preamble_end: int | None
    epilogue_start: int | None

    def __post_init__(self):
        if (
            self.preamble_end is not None
            and self.epilogue_start is not None
            and self.preamble_end >= self.epilogue_start
        ):
            raise ValueError("preamble_end must precede epilogue_start")


IsFrequent = Callable[[str], bool]


def find_preamble_end(
    top: Sequence[NormalizedLine], is_frequent: IsFrequent, cfg: DetectorConfig
) -> int | None:
    """Scan forward through the top window for the end of the preamble.

    Leading infrequent lines are skipped; after the first frequent line the
    scan stops once ``gap_max`` consecutive infrequent lines pass.  Returns
    the raw index of the last frequent line seen, or None if the window holds
    no frequent line at all.
    """
    last_frequent: int | None = None
    gap = 0
    for line in top:
        if is_frequent(line.text):
            last_frequent = line.raw_index
            gap = 0
        elif last_frequent is not None:
            gap += 1
            if gap >= cfg.gap_max:
                break
    return last_frequent


def find_epilogue_start(
    bottom: Sequence[NormalizedLine], is_frequent: IsFrequent, cfg: DetectorConfig
) -> int | None:
    """Scan backward from the file end for the start of the epilogue.

    Unlike the forward scan there is no skip phase: the gap counter runs from
    the very last line, so a file whose tail is plain text yields None.
    Returns the raw index of the earliest frequent line reached.
    """
    earliest: int | None = None
    gap = 0
    for line in reversed(bottom):
        if is_frequent(line.text):
            earliest = line.raw_index
            gap = 0
        else:
            gap += 1
            if gap >= cfg.gap_max:
                break
    return earliest


def match_heuristic(line: RawLine, zone: str) -> str | None:
    """Classify one raw line as a boilerplate marker for its zone.

    ``zone`` is "near_start" or "near_end"; start-of-text markers only count
    near the start, end-of-text markers (or lines opening with ETEXT) only
    near the end.
    """
    if zone == "near_start":
        if _PREAMBLE_RE.match(line.text):
            return PREAMBLE_MARKER
        return None
    if zone == "near_end":
        if _EPILOGUE_RE.match(line.text) or line.text.startswith("ETEXT"):
            return EPILOGUE_MARKER
        return None
    raise ValueError(f"unknown zone {zone!r}")


def _heuristic_boundaries(
    lines: Sequence[RawLine], cfg: DetectorConfig
) -> tuple[int | None, int | None]:
    last_preamble_marker = None
    for line in lines[: cfg.p_max]:
        if match_heuristic(line, "near_start") == PREAMBLE_MARKER:
            last_preamble_marker = line.index
    first_epilogue_marker = None
    near_end_from = max(0, len(lines) - cfg.e_max)
    for line in lines[near_end_from:]:
        if match_heuristic(line, "near_end") == EPILOGUE_MARKER:
            first_epilogue_marker = line.index
            break
    return last_preamble_marker, first_epilogue_marker


def detect(
    lines: Sequence[RawLine],
    is_frequent: IsFrequent,
    cfg: DetectorConfig,
    file_id: str = "",
) -> BoundaryReport:
    """Run both boundary scans on one file and fold in the heuristics.

    The heuristic markers can only grow the preamble (max of the two ends)
    and only grow the epilogue (min of the two starts); a missing value on
    either side defers to the other.  If the combined boundaries cross, the
    epilogue is dropped: falsely cutting body text is the costlier mistake.
    """
    top, bottom = extract_window(lines, cfg.p_max, cfg.e_max)
    preamble_end = find_preamble_end(top, is_frequent, cfg)
    epilogue_start = find_epilogue_start(bottom, is_frequent, cfg)
    if cfg.heuristics_enabled:
        marker_end, marker_start = _heuristic_boundaries(lines, cfg)
        candidates_end = [b for b in (preamble_end, marker_end) if b is not None]
        preamble_end = max(candidates_end) if candidates_end else None
        candidates_start = [b for b in (epilogue_start, marker_start) if b is not None]
        epilogue_start = min(candidates_start) if candidates_start else None
    if (
        preamble_end is not None
        and epilogue_start is not None
        and preamble_end >= epilogue_start
    ):
        epilogue_start = None
    return BoundaryReport(file_id, preamble_end, epilogue_start)


def strip_boilerplate(lines: Sequence[RawLine], report: BoundaryReport) -> list[RawLine]:
    """Keep only the body: lines strictly between the detected boundaries."""
    start = 0 if report.preamble_end is None else report.preamble_end + 1
    end = len(lines) if report.epilogue_start is None else report.epilogue_start
    return list(lines[start:end])


# -- report serialization --------------------------------------------------------


def format_report(report: BoundaryReport) -> str:
    pre = "-" if report.preamble_end is None else str(report.preamble_end)
    epi = "-" if report.epilogue_start is None else str(report.epilogue_start)
    return f"{report.file_id}\t{pre}\t{epi}"


def write_reports(
    path: Path | str, reports: Iterable[BoundaryReport], header: str | None = None
) -> None:
    """Write one ``file<TAB>preamble_end<TAB>epilogue_start`` record per line."""
    with open(path, "w", encoding="latin-1", newline="\n") as handle:
        if header:
            handle.write(f"# {header}\n")
        for report in reports:
            handle.write(format_report(report) + "\n")


def parse_report_line(line: str) -> BoundaryReport:
    file_id, pre, epi = line.split("\t")
    return BoundaryReport(
        file_id,
        None if pre == "-" else int(pre),
        None if epi == "-" else int(epi),
    )


def read_reports(path: Path | str) -> list[BoundaryReport]:
    """Read a report file, skipping comment lines."""
    reports = []
    with open(path, "r", encoding="latin-1", newline="\n") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            reports.append(parse_report_line(line))
    return reports
