import random

from hypothesis import given, strategies as st

from boilercut.preprocess import (
    NormalizedLine,
    RawLine,
    extract_window,
    normalize_line,
    normalize_text,
    split_lines,
)


def test_star_runs_collapse_to_three():
    raw = RawLine("***** END OF BOOK: SUPPLEMENTARY MATERIALS *****", 0)
    assert normalize_line(raw).text == "*** END OF BOOK: SUPPLEMENTARY MATERIALS ***"


def test_short_line_is_trivial():
    assert normalize_line(RawLine("CHAPTER 1", 0)) is None


def test_no_alphabetics_is_trivial():
    assert normalize_line(RawLine("----------------------------------------", 0)) is None


def test_trim_only_case():
    raw = RawLine("  This eBook is for the use of anyone anywhere at no cost  ", 4)
    normalized = normalize_line(raw)
    assert normalized == NormalizedLine(
        "This eBook is for the use of anyone anywhere at no cost", 4
    )


def test_single_star_not_inflated():
    assert normalize_text("* a lone star should stay alone here *") == (
        "* a lone star should stay alone here *"
    )


def test_whitespace_runs_collapse():
    assert normalize_text("a\t\t b    c") == "a b c"


def test_dash_runs_collapse():
    assert normalize_text("-- see the ---- appendix ------") == "--- see the --- appendix ---"


def test_min_length_counts_normalized_characters():
    # 31 raw chars but collapses below the default threshold
    raw = RawLine("a        b        c        d   ", 0)
    assert normalize_line(raw) is None
    assert normalize_line(raw, min_len=7) == NormalizedLine("a b c d", 0)


@given(st.text(alphabet=st.characters(min_codepoint=9, max_codepoint=0x2FF), max_size=120))
def test_normalization_is_idempotent(text):
    once = normalize_text(text)
    assert normalize_text(once) == once


@given(st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=126), max_size=120))
def test_normalized_invariants(text):
    result = normalize_line(RawLine(text, 0), min_len=5)
    if result is None:
        return
    assert result.text == result.text.strip()
    assert "****" not in result.text
    assert "----" not in result.text
    assert "  " not in result.text


def test_split_lines_strips_cr_and_decodes_latin1():
    lines = split_lines(b"alpha\r\nbeta\nl\xe9gume\n")
    assert [line.text for line in lines] == ["alpha", "beta", "l\xe9gume"]
    assert [line.index for line in lines] == [0, 1, 2]


def test_split_lines_without_trailing_newline():
    assert [line.text for line in split_lines("a\nb")] == ["a", "b"]


def test_split_lines_empty():
    assert split_lines(b"") == []


def _brute_force_window(lines, p_max, e_max, min_len=30):
    kept = [n for n in (normalize_line(raw, min_len) for raw in lines) if n is not None]
    return kept[:p_max], kept[-e_max:]


def test_window_on_short_file_overlaps():
    lines = [RawLine(f"this is a sufficiently long line number {i:04d}", i) for i in range(10)]
    top, bottom = extract_window(lines, 300, 300)
    assert top == bottom
    assert len(top) == 10


def test_window_all_trivial():
    lines = [RawLine("tiny", i) for i in range(40)]
    assert extract_window(lines) == ([], [])


def test_window_empty_file():
    assert extract_window([]) == ([], [])


def test_window_matches_brute_force_on_random_files():
    rng = random.Random(7)
    for _ in range(50):
        lines = []
        for i in range(rng.randint(0, 900)):
            if rng.random() < 0.35:
                lines.append(RawLine("short", i))
            else:
                lines.append(RawLine(f"padding text that is long enough {rng.randint(0, 5)} {i}", i))
        p_max = rng.choice([1, 3, 50, 300])
        e_max = rng.choice([1, 3, 50, 300])
        assert extract_window(lines, p_max, e_max) == _brute_force_window(lines, p_max, e_max)


def test_window_spec_sized_file():
    # 1000 raw lines, 650 non-trivial: top and bottom are 300-line slices
    lines = []
    non_trivial = 0
    for i in range(1000):
        if i % 20 < 7:
            lines.append(RawLine("x", i))
        else:
            non_trivial += 1
            lines.append(RawLine(f"a long enough non-trivial line of text {i:05d}", i))
    assert non_trivial == 650
    top, bottom = extract_window(lines, 300, 300)
    expected_top, expected_bottom = _brute_force_window(lines, 300, 300)
    assert (top, bottom) == (expected_top, expected_bottom)
    assert len(top) == len(bottom) == 300


@given(
    st.lists(
        st.tuples(st.booleans(), st.integers(min_value=0, max_value=9)), max_size=120
    ),
    st.integers(min_value=1, max_value=20),
    st.integers(min_value=1, max_value=20),
)
def test_window_indices_strictly_increasing(flags, p_max, e_max):
    lines = [
        RawLine(f"generated non-trivial payload line {tag}" if keep else "no", i)
        for i, (keep, tag) in enumerate(flags)
    ]
    top, bottom = extract_window(lines, p_max, e_max)
    for window in (top, bottom):
        indices = [line.raw_index for line in window]
        assert indices == sorted(indices)
        assert len(set(indices)) == len(indices)
