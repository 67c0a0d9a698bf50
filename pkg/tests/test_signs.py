from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signrank.linalg import RationalMatrix
from signrank.signs import (FREE, GEN_SIGNS, MINUS, PLUS, SIGNS, ZERO, GenSignPattern, PatternError,
                            PatternParseError, RefinementCapError, is_member, parse, refinements,
                            serialize, sgn_of_matrix, sign_of, sign_sub)

P = GenSignPattern.from_rows


def patterns(signs=GEN_SIGNS, max_dim=5):
    return st.integers(1, max_dim).flatmap(lambda m: st.integers(1, max_dim).flatmap(
        lambda n: st.lists(st.lists(st.sampled_from(signs), min_size=n, max_size=n),
                           min_size=m, max_size=m))).map(lambda g: GenSignPattern(tuple(map(tuple, g))))


rationals = st.fractions(min_value=-20, max_value=20, max_denominator=5)


def rational_matrices(max_dim=4):
    return st.integers(1, max_dim).flatmap(lambda m: st.integers(1, max_dim).flatmap(
        lambda n: st.lists(st.lists(rationals, min_size=n, max_size=n), min_size=m, max_size=m)
    )).map(RationalMatrix.of)


@pytest.mark.parametrize("a, b, expected", [
    (PLUS, ZERO, PLUS), (ZERO, MINUS, PLUS), (PLUS, MINUS, PLUS),
    (MINUS, PLUS, MINUS), (ZERO, PLUS, MINUS), (MINUS, ZERO, MINUS),
    (ZERO, ZERO, ZERO),
    (PLUS, PLUS, FREE), (MINUS, MINUS, FREE),
])
def test_sign_sub_table(a, b, expected):
    assert sign_sub(a, b) == expected


def test_sign_sub_free_exactly_on_equal_nonzero():
    for a in SIGNS:
        for b in SIGNS:
            assert (sign_sub(a, b) == FREE) == (a == b and a != ZERO)


def test_sign_sub_rejects_free():
    with pytest.raises(PatternError):
        sign_sub(FREE, PLUS)


@given(st.sampled_from(SIGNS), st.sampled_from(SIGNS),
       st.fractions(min_value=Fraction(1, 100), max_value=100),
       st.fractions(min_value=Fraction(1, 100), max_value=100))
def test_sign_sub_semantics(p, q, x, y):
    # a real of class p minus a real of class q lands in class sign_sub(p, q)
    val = {PLUS: 1, MINUS: -1, ZERO: 0}
    diff = val[p] * x - val[q] * y
    s = sign_sub(p, q)
    assert s == FREE or sign_of(diff) == s


def test_sgn_of_matrix_examples():
    assert sgn_of_matrix(RationalMatrix.of([[3, -1], [0, 2]])) == P(["+ -", "0 +"])
    assert sgn_of_matrix(RationalMatrix.zeros(2, 3)) == P(["0 0 0", "0 0 0"])
    assert sgn_of_matrix(RationalMatrix.of([[-5]])) == P(["-"])


def test_is_member_examples():
    assert is_member(RationalMatrix.of([[1, -2], [0, 7]]), P(["+ -", "0 +"]))
    assert is_member(RationalMatrix.of([[1]]), P(["#"]))
    assert not is_member(RationalMatrix.of([[0]]), P(["+"]))


def test_is_member_shape_mismatch():
    with pytest.raises(PatternError, match="incompatible shapes"):
        is_member(RationalMatrix.of([[1, 2]]), P(["+"]))


@given(rational_matrices())
def test_member_of_own_sign_pattern(b):
    assert is_member(b, sgn_of_matrix(b))


@given(rational_matrices(), st.data())
def test_negate_transpose_preserve_membership(b, data):
    a = sgn_of_matrix(b)
    # loosen some cells to '#' so the check covers generalized patterns too
    for i, j, _ in list(a.cells()):
        if data.draw(st.booleans()):
            a = a.replace(i, j, FREE)
    assert is_member(b, a) == is_member(-b, a.negate()) == is_member(b.T, a.transpose())


def test_refinements_examples():
    assert refinements(P(["#"])) == [P(["+"]), P(["-"]), P(["0"])]
    plain = P(["+ 0", "- +"])
    assert refinements(plain) == [plain]
    assert refinements(P(["# +"])) == [P(["+ +"]), P(["- +"]), P(["0 +"])]


@settings(max_examples=50)
@given(patterns(max_dim=3))
def test_refinements_are_below(c):
    refs = refinements(c)
    assert len(refs) == 3 ** c.free_count
    assert len(set(refs)) == len(refs)
    assert all(a.is_sign_pattern and a <= c for a in refs)


def test_refinement_cap():
    with pytest.raises(RefinementCapError, match="3 '#'"):
        refinements(P(["# # #"]), cap=2)


def test_negate_transpose_examples():
    assert P(["+ 0", "- #"]).negate() == P(["- 0", "+ #"])


@given(patterns())
def test_involutions(a):
    assert a.transpose().transpose() == a
    assert a.negate().negate() == a
    assert a.transpose().shape == (a.cols, a.rows)


@given(patterns())
def test_text_round_trip(a):
    assert parse(serialize(a)) == a


def test_parse_skips_comments_and_blank_lines():
    text = "; example\n\n+  -   0\n; mid\n#  0 +\n\n"
    assert parse(text) == P(["+ - 0", "# 0 +"])


def test_parse_reports_line_and_column():
    with pytest.raises(PatternParseError) as err:
        parse("+ - 0\n+ x 0\n")
    assert (err.value.line, err.value.column) == (2, 3)
    with pytest.raises(PatternParseError, match="line 3"):
        parse("+ -\n; c\n+ - 0\n")
    with pytest.raises(PatternParseError):
        parse("; only comments\n")


def test_ragged_pattern_rejected():
    with pytest.raises(PatternError):
        GenSignPattern((("+", "-"), ("+",)))
