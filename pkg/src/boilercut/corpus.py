"""Corpus plumbing: ingestion, spooling, external counting, synthesis, scoring.

A corpus is a directory tree of plain-text files.  Pass 1 can spool every
window line to a flat file so that in-memory backends and the external-sort
counter consume byte-identical input; the synthetic generator fabricates a
corpus with known boundaries so detection error can be scored exactly.
"""

from __future__ import annotations

import heapq
import os
import random
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .counters import FrequencyStore
from .detector import BoundaryReport
from .preprocess import (
    DEFAULT_BOTTOM_WINDOW,
    DEFAULT_TOP_WINDOW,
    RawLine,
    extract_window,
    split_lines,
)


@dataclass(frozen=True)
class FileEntry:
    path: Path
    size_bytes: int
    line_count: int


@dataclass
class CorpusManifest:
    """Deterministic listing of the candidate text files under a root."""

    root: Path
    files: list[FileEntry]
    skipped: int = 0

    def __len__(self) -> int:
        return len(self.files)

    def relative_ids(self) -> list[str]:
        return [entry.path.relative_to(self.root).as_posix() for entry in self.files]


def _is_candidate(path: Path) -> bool:
    # Only plain-text payload files; README-style files are not e-book text.
    if path.suffix.lower() != ".txt":
        return False
    return not path.stem.lower().startswith("readme")


def ingest(root: Path | str) -> CorpusManifest:
    """Walk a corpus root and build a manifest sorted by relative path.

    Unreadable individual files are skipped and counted; an unreadable root
    raises the underlying OSError.
    """
    root = Path(root)
    if not root.is_dir():
        raise NotADirectoryError(f"corpus root {root} is not a directory")
    entries = []
    skipped = 0
    for path in sorted(root.rglob("*")):
        if not path.is_file() or not _is_candidate(path):
            continue
        try:
            data = path.read_bytes()
        except OSError:
            skipped += 1
            continue
        entries.append(FileEntry(path, len(data), data.count(b"\n")))
    return CorpusManifest(root, entries, skipped)


def read_raw_lines(path: Path | str) -> list[RawLine]:
    return split_lines(Path(path).read_bytes())


def record_windows(
    store: FrequencyStore,
    lines: Sequence[RawLine],
    p_max: int = DEFAULT_TOP_WINDOW,
    e_max: int = DEFAULT_BOTTOM_WINDOW,
) -> int:
    """Pass-1 step for one file: record every window line into the store.

    Top and bottom windows are both recorded in file order; in a short file
    they overlap and the shared lines count twice, exactly as two physical
    scans of the file edges would see them.
    """
    top, bottom = extract_window(lines, p_max, e_max)
    for line in top:
        store.record(line.text)
    for line in bottom:
        store.record(line.text)
    return len(top) + len(bottom)


def write_spool(
    manifest: CorpusManifest,
    spool_path: Path | str,
    p_max: int = DEFAULT_TOP_WINDOW,
    e_max: int = DEFAULT_BOTTOM_WINDOW,
) -> int:
    """Spool every window line of the corpus, one LF-terminated record each."""
    records = 0
    with open(spool_path, "w", encoding="latin-1", newline="\n") as spool:
        for entry in manifest.files:
            lines = read_raw_lines(entry.path)
            top, bottom = extract_window(lines, p_max, e_max)
            for line in top:
                spool.write(line.text + "\n")
            for line in bottom:
                spool.write(line.text + "\n")
            records += len(top) + len(bottom)
    return records


def external_sort_count(
    spool_path: Path | str,
    threshold: int,
    memory_budget: int = 64 * 1024 * 1024,
) -> list[tuple[int, str]]:
    """Count spool records without holding them all in memory.

    Sorted runs are written within ``memory_budget`` bytes of buffered line
    text, merged with a heap, and aggregated; returns (count, text) pairs with
    count >= threshold, sorted by text.  The result matches what an exact
    in-memory counter would report for the same spool.
    """
    if memory_budget < 1:
        raise ValueError("memory budget must be positive")
    run_paths: list[str] = []
    result: list[tuple[int, str]] = []
    with tempfile.TemporaryDirectory(prefix="extsort-") as tmp:

        def flush(chunk: list[str]) -> None:
            chunk.sort()
            run_path = os.path.join(tmp, f"run-{len(run_paths):06d}")
            with open(run_path, "w", encoding="latin-1", newline="\n") as run:
                run.writelines(line + "\n" for line in chunk)
            run_paths.append(run_path)

        chunk: list[str] = []
        used = 0
        with open(spool_path, "r", encoding="latin-1", newline="\n") as spool:
            for record in spool:
                record = record.rstrip("\n")
                cost = len(record) + 1
                if cost > memory_budget:
                    raise ValueError("memory budget is smaller than a single record")
                if used + cost > memory_budget and chunk:
                    flush(chunk)
                    chunk = []
                    used = 0
                chunk.append(record)
                used += cost
        if chunk:
            flush(chunk)

        runs = [open(path, "r", encoding="latin-1", newline="\n") for path in run_paths]
        try:
            current: str | None = None
            count = 0
            for record in heapq.merge(*runs):
                record = record.rstrip("\n")
                if record == current:
                    count += 1
                else:
                    if current is not None and count >= threshold:
                        result.append((count, current))
                    current = record
                    count = 1
            if current is not None and count >= threshold:
                result.append((count, current))
        finally:
            for run in runs:
                run.close()
    return result


# -- synthetic corpus ------------------------------------------------------------


@dataclass(frozen=True)
class GoldAnnotation:
    """True boilerplate boundaries for one generated file."""

    file_id: str
    preamble_end: int | None
    epilogue_start: int | None


@dataclass
class SyntheticSpec:
    """Recipe for a corpus with known boundaries.

    Every preamble/epilogue template variant is shared by many files; with
    ``mutation_rate`` > 0 each shared template line is independently replaced
    by a file-unique variant, which models hand-retyped boilerplate (those
    lines become false negatives for the detector).
    """

    n_files: int = 100
    preamble_variants: int = 5
    epilogue_variants: int = 4
    epilogue_probability: float = 0.85
    body_line_range: tuple[int, int] = (40, 400)
    mutation_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation rate must be in [0, 1]")
        if self.preamble_variants < 1:
            raise ValueError("need at least one preamble template")
        if self.body_line_range[0] < 1 or self.body_line_range[0] > self.body_line_range[1]:
            raise ValueError("invalid body line range")


_WORDS = (
    "the quick brown fox jumps over a lazy dog while morning light settles "
    "across quiet harbour towns and distant mountain roads where travellers "
    "exchange letters about weather harvest markets ships voyages islands "
    "gardens libraries candles winters evenings strangers promises fortunes "
    "histories rumours bridges rivers meadows villages"
).split()

_PREAMBLE_FLAVOURS = (
    "Transcribed from the {year} edition by volunteers working from scanned page images.",
    "This text was prepared from a photographic reprint held by a lending library.",
    "Produced by a distributed team of proofreaders using printed page scans.",
    "Prepared from an archival microfilm copy supplied by a university library.",
    "This electronic text was keyed in twice and the copies compared carefully.",
    "Produced from page images generously made available by a public archive.",
    "Prepared by cross-checking two independent transcriptions of the printed book.",
)

_EPILOGUE_FLAVOURS = (
    "Most people start at our main site which carries the full search facility.",
    "Checks on the electronic edition were carried out against the printed text.",
    "Corrected editions of this file will replace the earlier copies in the archive.",
    "Volunteers and donations keep collections like this one freely available.",
    "Information about founding new mirrors of the collection is available online.",
    "This etext was produced by volunteers and is distributed free of charge.",
)


def _preamble_template(variant: int) -> list[str]:
    flavour = _PREAMBLE_FLAVOURS[variant % len(_PREAMBLE_FLAVOURS)]
    second = _PREAMBLE_FLAVOURS[(variant + 3) % len(_PREAMBLE_FLAVOURS)]
    return [
        "The Project Gutenberg eBook of {title}, by {author}",
        "",
        "This eBook is for the use of anyone anywhere in the United States and",
        "most other parts of the world at no cost and with almost no restrictions",
        "whatsoever. You may copy it, give it away or re-use it under the terms",
        "of the Project Gutenberg License included with this eBook or online.",
        "",
        f"** This is edition layout number {variant} of the copyrighted text, details below **",
        "**     Please follow the copyright guidelines in this file.     **",
        "",
        "Title: {title}",
        "Author: {author}",
        "Release Date: {date} [eBook #{number}]",
        "Language: English",
        "",
        flavour,
        second.replace("{year}", "1901"),
        "",
        "*** START OF THE PROJECT GUTENBERG EBOOK {upper_title} ***",
    ]


def _epilogue_template(variant: int) -> list[str]:
    flavour = _EPILOGUE_FLAVOURS[variant % len(_EPILOGUE_FLAVOURS)]
    second = _EPILOGUE_FLAVOURS[(variant + 2) % len(_EPILOGUE_FLAVOURS)]
    return [
        "End of the Project Gutenberg EBook of {title}, by {author}",
        "",
        "This file should be named {stem}.txt or {stem}.zip",
        "",
        "Updated editions of this work will replace the previous one, and the",
        "old editions will be renamed to keep the numbering consistent for readers.",
        "Creating derived works from public domain print editions means that no",
        f"one owns a United States copyright in release series {variant} of these works,",
        "so the collection can distribute them without permission and without",
        "paying copyright royalties to anyone at all.",
        "",
        flavour,
        second,
    ]


def _salad(rng: random.Random, words: int) -> str:
    return " ".join(rng.choice(_WORDS) for _ in range(words))


def _unique_line(file_index: int, line_tag: int, rng: random.Random) -> str:
    # Salted with the file id so the line can never be frequent corpus-wide.
    return f"{_salad(rng, 6)} pg{file_index:05d}x{line_tag:04d}"


def generate_synthetic(
    spec: SyntheticSpec, out_dir: Path | str
) -> list[GoldAnnotation]:
    """Write a synthetic corpus under ``out_dir`` and return its gold boundaries.

    Output is a function of the recipe alone: the same recipe produces the
    same bytes.  Files land in numbered subdirectories mirroring a real
    archive.
    """
    out_dir = Path(out_dir)
    gold: list[GoldAnnotation] = []
    for file_index in range(spec.n_files):
        rng = random.Random(f"{spec.seed}:{file_index}")
        # mutation noise lives on its own generator so that the same seed
        # yields the same titles and bodies at every mutation rate
        mutation_rng = random.Random(f"{spec.seed}:mutation:{file_index}")
        title = f"{_salad(rng, 3).title()} Volume {file_index % 7 + 1}"
        author = f"{rng.choice(_WORDS).title()} {rng.choice(_WORDS).title()}"
        stem = f"book{file_index:05d}"
        fill = {
            "title": title,
            "upper_title": title.upper(),
            "author": author,
            "date": f"March {file_index % 28 + 1}, {1994 + file_index % 12}",
            "number": str(10_000 + file_index),
            "stem": stem,
        }

        def render(template: list[str], mutable: bool) -> list[str]:
            rendered = []
            for tag, line in enumerate(template):
                text = line
                for key, value in fill.items():
                    text = text.replace("{" + key + "}", value)
                unique = text != line  # lines with per-file inserts are never shared
                if (
                    mutable
                    and line
                    and not unique
                    and mutation_rng.random() < spec.mutation_rate
                ):
                    text = _unique_line(file_index, tag, mutation_rng)
                rendered.append(text)
            return rendered

        preamble = render(_preamble_template(file_index % spec.preamble_variants), True)
        body_lines = rng.randint(*spec.body_line_range)
        body: list[str] = []
        for tag in range(body_lines):
            if tag % 17 == 13:
                body.append(f"CHAPTER {tag % 9 + 1}.")
            elif tag % 6 == 5:
                body.append("")
            else:
                body.append(_unique_line(file_index, tag, rng))
        has_epilogue = spec.epilogue_variants > 0 and rng.random() < spec.epilogue_probability
        epilogue = (
            render(_epilogue_template(file_index % spec.epilogue_variants), True)
            if has_epilogue
            else []
        )

        lines = preamble + [""] + body + ([""] + epilogue if epilogue else [])
        relative = Path(f"{file_index // 100:03d}") / f"{stem}.txt"
        target = out_dir / relative
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(("\n".join(lines) + "\n").encode("latin-1"))

        preamble_end = len(preamble) - 1
        epilogue_start = len(preamble) + 1 + len(body) + 1 if epilogue else None
        gold.append(GoldAnnotation(relative.as_posix(), preamble_end, epilogue_start))
    return gold


def write_gold(path: Path | str, gold: Iterable[GoldAnnotation]) -> None:
    """Gold annotations share the report TSV shape for easy diffing."""
    with open(path, "w", encoding="latin-1", newline="\n") as handle:
        for entry in gold:
            pre = "-" if entry.preamble_end is None else str(entry.preamble_end)
            epi = "-" if entry.epilogue_start is None else str(entry.epilogue_start)
            handle.write(f"{entry.file_id}\t{pre}\t{epi}\n")


def read_gold(path: Path | str) -> list[GoldAnnotation]:
    gold = []
    with open(path, "r", encoding="latin-1", newline="\n") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            file_id, pre, epi = line.split("\t")
            gold.append(
                GoldAnnotation(
                    file_id,
                    None if pre == "-" else int(pre),
                    None if epi == "-" else int(epi),
                )
            )
    return gold


# -- evaluation ------------------------------------------------------------------


CATEGORY_OK = "ok"
CATEGORY_PREAMBLE = "preamble_presence"
CATEGORY_EPILOGUE = "epilogue_presence"
CATEGORY_BOTH = "both_presence"


@dataclass(frozen=True)
class FileScore:
    """Signed detection errors for one file; None where presence disagreed."""

    file_id: str
    preamble_error: int | None
    epilogue_error: int | None
    category: str


@dataclass
class EvaluationResult:
    scores: list[FileScore]
    preamble_errors: list[int] = field(default_factory=list)
    epilogue_errors: list[int] = field(default_factory=list)
    preamble_mismatches: int = 0
    epilogue_mismatches: int = 0

    @property
    def n_files(self) -> int:
        return len(self.scores)

    def fraction_within(self, side: str, tolerance: int) -> float:
        """Share of all files whose |error| on one side is within tolerance.

        Presence mismatches count as failures: a boundary reported on the
        wrong side of existence is never within tolerance.
        """
        errors = self.preamble_errors if side == "preamble" else self.epilogue_errors
        if not self.scores:
            return 1.0
        return sum(1 for e in errors if abs(e) <= tolerance) / len(self.scores)


def _side_error(gold_value: int | None, detected_value: int | None, sign: int) -> tuple[int | None, bool]:
    if gold_value is None and detected_value is None:
        return 0, False
    if gold_value is None or detected_value is None:
        return None, True
    return sign * (gold_value - detected_value), False


def evaluate(
    reports: Sequence[BoundaryReport], gold: Sequence[GoldAnnotation]
) -> EvaluationResult:
    """Score detection against gold annotations, file by file.

    Preamble error is gold minus detected; epilogue error is detected minus
    gold.  Under both conventions a negative number means too many lines were
    removed and a positive number means too few.  Files where one side exists
    in only one of the two inputs land in a presence-mismatch category
    instead of producing a bogus number.
    """
    by_id = {report.file_id: report for report in reports}
    gold_ids = {entry.file_id for entry in gold}
    if set(by_id) != gold_ids or len(by_id) != len(reports):
        raise ValueError("reports and gold annotations must cover the same file ids")
    scores: list[FileScore] = []
    result = EvaluationResult(scores)
    for entry in sorted(gold, key=lambda g: g.file_id):
        report = by_id[entry.file_id]
        pre_err, pre_bad = _side_error(entry.preamble_end, report.preamble_end, 1)
        epi_err, epi_bad = _side_error(entry.epilogue_start, report.epilogue_start, -1)
        if pre_bad and epi_bad:
            category = CATEGORY_BOTH
        elif pre_bad:
            category = CATEGORY_PREAMBLE
        elif epi_bad:
            category = CATEGORY_EPILOGUE
        else:
            category = CATEGORY_OK
        scores.append(FileScore(entry.file_id, pre_err, epi_err, category))
        if pre_bad:
            result.preamble_mismatches += 1
        else:
            result.preamble_errors.append(pre_err)
        if epi_bad:
            result.epilogue_mismatches += 1
        else:
            result.epilogue_errors.append(epi_err)
    result.preamble_errors.sort()
    result.epilogue_errors.sort()
    return result
