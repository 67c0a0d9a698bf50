import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signrank.separation import (Separation, SeparationError, assemble, extract_blocks,
                                 find_1_separations, first_separation, permuted)
from signrank.signs import GEN_SIGNS, ZERO, GenSignPattern

P = GenSignPattern.from_rows


def brute_separations(m: GenSignPattern) -> set[Separation]:
    """Every valid split, by trying all subsets directly."""
    out = set()
    for r, c in itertools.product(range(m.rows), range(m.cols)):
        rows = [i for i in range(m.rows) if i != r]
        cols = [j for j in range(m.cols) if j != c]
        for k in range(1, len(rows)):
            for r1 in itertools.combinations(rows, k):
                if rows[0] not in r1:
                    continue
                r2 = tuple(i for i in rows if i not in r1)
                for l in range(1, len(cols)):
                    for c1 in itertools.combinations(cols, l):
                        c2 = tuple(j for j in cols if j not in c1)
                        s = Separation(r, c, r1, c1, r2, c2)
                        if s.is_valid(m):
                            out.add(s)
    return out


def patterns(max_dim=5, signs=GEN_SIGNS, zero_weight=3):
    pool = list(signs) + [ZERO] * zero_weight
    return st.integers(3, max_dim).flatmap(lambda m: st.integers(3, max_dim).flatmap(
        lambda n: st.lists(st.lists(st.sampled_from(pool), min_size=n, max_size=n),
                           min_size=m, max_size=m))).map(lambda g: GenSignPattern(tuple(map(tuple, g))))


def test_example_a_separations():
    a = P(["0 + 0", "+ 0 +", "0 + 0"])
    seps = find_1_separations(a)
    assert Separation(1, 1, (0,), (0,), (2,), (2,)) in seps
    assert seps[0] == Separation(0, 0, (1,), (2,), (2,), (1,))
    assert len(seps) == 6


def test_example_b_separation_found():
    b = P(["+ + 0 0 0", "+ + 0 0 0", "0 + + + 0", "0 0 + 0 +"])
    seps = find_1_separations(b)
    assert Separation(2, 2, (0, 1), (0, 1), (3,), (3, 4)) in seps
    assert seps == sorted(seps, key=lambda s: (s.cut_row, s.cut_col, s.rows1, s.cols1))


def test_full_pattern_has_none():
    assert find_1_separations(P(["+ + +"] * 3)) == []
    assert first_separation(P(["+ + +"] * 3)) is None
    assert find_1_separations(P(["0 0", "0 0"])) == []


def test_free_entries_connect():
    # a '#' is treated as possibly nonzero, so it blocks the split
    assert find_1_separations(P(["+ + #", "+ + +", "0 + +"])) == []
    assert find_1_separations(P(["+ + 0", "+ + +", "0 + +"]))


def test_zero_pattern_3x3():
    z = P(["0 0 0"] * 3)
    assert {s for s in find_1_separations(z)} == brute_separations(z)


@settings(max_examples=150, deadline=None)
@given(patterns(max_dim=5))
def test_matches_brute_force(m):
    seps = find_1_separations(m)
    assert len(set(seps)) == len(seps)
    assert set(seps) == brute_separations(m)
    assert all(s.is_valid(m) for s in seps)


@settings(max_examples=60, deadline=None)
@given(patterns(max_dim=5))
def test_transpose_maps_separations(m):
    seps = {s.transposed().canonical() for s in find_1_separations(m)}
    assert seps == set(find_1_separations(m.transpose()))


def test_validate_errors():
    a = P(["0 + 0", "+ 0 +", "0 + 0"])
    with pytest.raises(SeparationError, match="partition"):
        Separation(1, 1, (0,), (0,), (2,), (1,)).validate(a)
    with pytest.raises(SeparationError, match=r"\(0, 2\)"):
        Separation(1, 1, (0,), (0,), (2,), (2,)).validate(P(["0 + +", "+ 0 +", "0 + 0"]))
    with pytest.raises(SeparationError, match="nonempty"):
        Separation(1, 1, (0, 2), (0, 2), (), ()).validate(a)


def test_blocks_round_trip():
    b = P(["+ + 0 0 0", "+ + 0 0 0", "0 + + + 0", "0 0 + 0 +"])
    s = Separation(2, 2, (0, 1), (0, 1), (3,), (3, 4))
    blocks = extract_blocks(b, s)
    assert blocks.a22 == "+"
    assert blocks.a33 == P(["0 +"])
    assert blocks.a12 == P(["0", "0"])
    assert assemble(blocks) == permuted(b, s)


def test_shuffled_pattern_still_separates():
    rng = random.Random(2)
    a = P(["+ - 0 0", "- + 0 0", "+ + - +", "0 0 + -"])
    for _ in range(20):
        rows, cols = list(range(4)), list(range(4))
        rng.shuffle(rows)
        rng.shuffle(cols)
        b = a.submatrix(rows, cols)
        seps = find_1_separations(b)
        assert seps
        for s in seps:
            assert assemble(extract_blocks(b, s)) == permuted(b, s)


def test_truncated_mode_emits_single_component_splits():
    # the cut row/column touch everything; six isolated diagonal blocks remain
    n = 7
    rows = [["+" if i == j or i == 0 or j == 0 else ZERO for j in range(n)] for i in range(n)]
    m = GenSignPattern(tuple(map(tuple, rows)))
    full = [s for s in find_1_separations(m) if (s.cut_row, s.cut_col) == (0, 0)]
    assert len(full) == 2 ** 5 - 1 and not any(s.truncated for s in full)
    cut = [s for s in find_1_separations(m, max_partitions=4) if (s.cut_row, s.cut_col) == (0, 0)]
    assert all(s.truncated and s.is_valid(m) for s in cut)
    assert {len(s.rows1) for s in cut} <= {1, 5}
    assert len(cut) == 6
