"""Line normalization and window extraction for plain-text corpus files.

Boilerplate detection works on canonicalized lines: decorations collapse to a
fixed width, whitespace collapses to single spaces, and lines too short to be
meaningful (or with no letters at all) are dropped as trivial.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

DEFAULT_MIN_LENGTH = 30
DEFAULT_TOP_WINDOW = 300
DEFAULT_BOTTOM_WINDOW = 300

_WHITESPACE_RUN = re.compile(r"\s+")
_STAR_RUN = re.compile(r"\*{2,}")
_DASH_RUN = re.compile(r"-{2,}")
_ALPHA = re.compile(r"[A-Za-z]")


@dataclass(frozen=True)
class RawLine:
    """One physical line of a source file and its 0-based position."""

    text: str
    index: int


@dataclass(frozen=True)
class NormalizedLine:
    """A canonicalized, non-trivial line that still knows where it came from."""

    text: str
    raw_index: int


def normalize_text(text: str) -> str:
    """Canonicalize one line of text.

    Whitespace runs collapse to a single space, then runs of two or more
    '*' or '-' collapse to exactly three, then the ends are trimmed.  A lone
    '*' or '-' is left alone so short decorations are not inflated.
    """
    text = _WHITESPACE_RUN.sub(" ", text)
    text = _STAR_RUN.sub("***", text)
    text = _DASH_RUN.sub("---", text)
    return text.strip()


def normalize_line(raw: RawLine, min_len: int = DEFAULT_MIN_LENGTH) -> NormalizedLine | None:
    """Normalize one raw line, or return None when the result is trivial.

    Trivial means shorter than ``min_len`` characters after normalization, or
    containing no ASCII letter.  The length test runs on the fully
    canonicalized text.
    """
    text = normalize_text(raw.text)
    if len(text) < min_len or not _ALPHA.search(text):
        return None
    return NormalizedLine(text, raw.index)


def split_lines(data: bytes | str) -> list[RawLine]:
    """Split file content on LF into RawLine records.

    Bytes are decoded as Latin-1 (every byte is valid) so a malformed file can
    never abort a corpus run.  A trailing CR is stripped from each line, which
    tolerates CRLF input.
    """
    if isinstance(data, bytes):
        data = data.decode("latin-1")
    parts = data.split("\n")
    if parts and parts[-1] == "":
        parts.pop()
    return [
        RawLine(text[:-1] if text.endswith("\r") else text, index)
        for index, text in enumerate(parts)
    ]


def extract_window(
    lines: Sequence[RawLine],
    p_max: int = DEFAULT_TOP_WINDOW,
    e_max: int = DEFAULT_BOTTOM_WINDOW,
    min_len: int = DEFAULT_MIN_LENGTH,
) -> tuple[list[NormalizedLine], list[NormalizedLine]]:
    """Return the first ``p_max`` and last ``e_max`` non-trivial lines.

    Windows are measured in non-trivial normalized lines, not raw lines; both
    windows preserve file order, and they overlap when the file is short.
    """
    if p_max <= 0 or e_max <= 0:
        raise ValueError("window sizes must be positive")
    top: list[NormalizedLine] = []
    for raw in lines:
        normalized = normalize_line(raw, min_len)
        if normalized is not None:
            top.append(normalized)
            if len(top) == p_max:
                break
    bottom: list[NormalizedLine] = []
    for raw in reversed(lines):
        normalized = normalize_line(raw, min_len)
        if normalized is not None:
            bottom.append(normalized)
            if len(bottom) == e_max:
                break
    bottom.reverse()
    return top, bottom
