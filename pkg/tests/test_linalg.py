import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from signrank import linalg as la
from signrank.linalg import BlockSplit, RationalMatrix as RM, Split2, rank

M = RM.of


def sympy_rank(a: RM) -> int:
    if a.rows == 0 or a.cols == 0:
        return 0
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in r] for r in a.entries]).rank()


small = st.fractions(min_value=-9, max_value=9, max_denominator=3)


def matrices(max_dim=6):
    return st.integers(1, max_dim).flatmap(lambda m: st.integers(1, max_dim).flatmap(
        lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=m, max_size=m))).map(M)


@pytest.mark.parametrize("a, expected", [
    (M([[1, 2], [2, 4]]), 1),
    (RM.zeros(3, 3), 0),
    (M([[0, 1, 0], [1, 0, 1], [0, 1, 0]]), 2),
])
def test_rank_examples(a, expected):
    assert rank(a) == expected == sympy_rank(a)


@settings(max_examples=200)
@given(matrices())
def test_rank_matches_sympy(a):
    assert rank(a) == sympy_rank(a)


@given(matrices(), st.randoms(use_true_random=False))
def test_rank_invariant_under_permutation_and_transpose(a, rnd):
    rows, cols = list(range(a.rows)), list(range(a.cols))
    rnd.shuffle(rows)
    rnd.shuffle(cols)
    assert rank(a) == rank(a.submatrix(rows, cols)) == rank(a.T)


def test_low_rank_generator():
    rng = random.Random(3)
    for _ in range(50):
        r = rng.randint(0, 3)
        assert rank(la.random_matrix(rng, 5, 4, max_rank=r)) <= r


def test_seeded_generators_reproduce():
    a = la.random_matrix(random.Random(11), 4, 4)
    b = la.random_matrix(random.Random(11), 4, 4)
    assert a == b
    assert all(x.denominator in (1, 2, 3) and abs(x.numerator) <= 9 for r in a.entries for x in r)


def test_kernel_examples():
    assert la.kernel_basis(RM.identity(2)) == []
    assert la.kernel_basis(RM.zeros(1, 1)) == [(Fraction(1),)]
    (v,) = la.kernel_basis(M([[1, 1]]))
    assert v[0] == -v[1] != 0


@given(matrices())
def test_kernel_basis(a):
    basis = la.kernel_basis(a)
    assert len(basis) == a.cols - rank(a)
    assert all(not any(a.matvec(v)) for v in basis)
    if basis:
        assert rank(M(basis)) == len(basis)
    assert all(not any(a.T.matvec(y)) for y in la.cokernel_basis(a))


def test_subdirect_sum_examples():
    c, d = M([[1, 2], [3, 4]]), M([[5]])
    assert la.subdirect_sum(c, d, 0) == la.direct_sum(c, d)
    assert la.subdirect_sum(M([[1]]), M([[2]]), 1) == M([[3]])
    assert la.subdirect_sum(M([[1, 1], [1, 1]]), RM.identity(2), 1) == M([[1, 1, 0], [1, 2, 0], [0, 0, 1]])
    with pytest.raises(la.ShapeError):
        la.subdirect_sum(M([[1]]), M([[1]]), 2)


def test_subdirect_inequality_examples():
    c, d = M([[1, 2], [2, 4]]), M([[1, 0], [0, 1]])
    assert rank(la.subdirect_sum(c, d, 0)) == rank(c) + rank(d)
    assert la.check_subdirect_inequality(M([[1]]), M([[-1]]), 1)
    assert rank(la.subdirect_sum(M([[1]]), M([[-1]]), 1)) == 0
    rng = random.Random(5)
    assert la.check_subdirect_inequality(la.random_matrix(rng, 4, 4), la.random_matrix(rng, 4, 4), 2)


@settings(max_examples=200)
@given(matrices(), matrices(), st.integers(0, 3))
def test_subdirect_inequality_property(c, d, k):
    k = min(k, c.rows, c.cols, d.rows, d.cols)
    s = la.subdirect_sum(c, d, k)
    assert s.shape == (c.rows + d.rows - k, c.cols + d.cols - k)
    assert la.check_subdirect_inequality(c, d, k)


@pytest.mark.parametrize("b, a, c, expected", [
    (M([[5]]), 1, 1, (2, 2)),
    (M([[1, 2], [3, 4]]), 2, -1, (3, 3)),
    (RM.zeros(2, 2), 1, 1, (2, 2)),
])
def test_bordered_rank_examples(b, a, c, expected):
    assert la.bordered_rank_identity(b, a, c) == expected


def test_bordered_rank_transforms_reduce():
    b = M([[1, 2, 3], [3, 4, 5]])
    ident = la.bordered_transforms(b, Fraction(2), Fraction(-1, 3))
    assert ident.p @ ident.bordered @ ident.q == M([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 4, 5]])
    assert ident.bordered_rank == sympy_rank(ident.bordered)


def test_bordered_rank_precondition():
    with pytest.raises(la.PreconditionError):
        la.bordered_rank_identity(M([[1]]), 0, 1)


@settings(max_examples=200)
@given(matrices(), small.filter(bool), small.filter(bool))
def test_bordered_rank_property(b, a, c):
    got, want = la.bordered_rank_identity(b, a, c)
    assert got == want == sympy_rank(b.submatrix(range(1, b.rows), range(1, b.cols))) + 2


def test_adjoin_examples():
    assert la.adjoin_rank_identity(M([[1, 1], [1, 1]]), Split2(1, 1), [0], [0]) == (1, 1)
    bordered = la.adjoin_matrix(M([[1, 2], [3, 0]]), Split2(1, 1), [1], [1])
    assert bordered == M([[0, 3, 0], [2, 1, 2], [0, 3, 0]])
    a = M([[1, 1], [1, 0]])
    assert la.adjoin_rank_identity(a, Split2(1, 1), [1], [1]) == (2, 2)
    assert la.adjoin_rank_identity(RM.identity(3), Split2(1, 1), [0, 0], [0, 0]) == (3, 3)


def test_adjoin_precondition():
    with pytest.raises(la.PreconditionError):
        la.adjoin_rank_identity(RM.identity(2), Split2(1, 1), [1], [0])


def test_adjoin_property():
    rng = random.Random(9)
    for _ in range(100):
        m1, n1, m2, n2 = (rng.randint(1, 4) for _ in range(4))
        a22 = la.random_matrix(rng, m2, n2, max_rank=min(m2, n2) - 1)
        a = la.block([[la.random_matrix(rng, m1, n1), la.random_matrix(rng, m1, n2)],
                      [la.random_matrix(rng, m2, n1), a22]])
        x = la.cokernel_basis(a22)[0]
        y = la.kernel_basis(a22)[-1]
        lhs, rhs = la.adjoin_rank_identity(a, Split2(m1, n1), x, y)
        assert lhs == rhs == sympy_rank(a)


def test_decompose_identity_is_split():
    case = la.decompose_real(RM.identity(3), BlockSplit(1, 1, 1, 1))
    assert case.case == la.SPLIT
    assert case.v == (0,) and case.z == (0,)
    assert case.lhs == case.rhs == 3


def test_decompose_example_a_realization_is_corner():
    case = la.decompose_real(M([[0, 1, 0], [1, 0, 1], [0, 1, 0]]), BlockSplit(1, 1, 1, 1))
    assert case.case == la.CORNER and case.lhs == 2


def test_decompose_example_b_left_part():
    # A11 = [1] is invertible, so both kernel tests are vacuous: SPLIT fires
    case = la.decompose_real(M([[1, 1, 0], [1, 1, 0], [0, 1, 1]]), BlockSplit(1, 1, 1, 1))
    assert case.case == la.SPLIT and case.lhs == case.rhs == 2


def test_decompose_rows_and_cols_cases():
    # zero A11/A33 with nonzero cut column only: x test vacuous, y test hits -> ROWS
    rows = M([[0, 1, 0], [0, 0, 0], [0, 1, 0]])
    assert la.decompose_real(rows, BlockSplit(1, 1, 1, 1)).case == la.ROWS
    assert la.decompose_real(rows.T, BlockSplit(1, 1, 1, 1)).case == la.COLS


def test_decompose_requires_zero_blocks():
    with pytest.raises(la.ShapeError):
        la.decompose_real(M([[1, 1, 1], [1, 1, 1], [1, 1, 1]]), BlockSplit(1, 1, 1, 1))


def test_split_transforms_block_diagonalize():
    a = M([[1, 2, 0], [2, 5, 1], [0, 3, 1]])
    split = BlockSplit(1, 1, 1, 1)
    case = la.decompose_real(a, split)
    assert case.case == la.SPLIT
    p, q = la.split_case_transforms(a, split, case.v, case.z)
    pq = p @ a @ q
    corner = la.dot(case.v, [Fraction(2)])  # v^T A11 z with A11 = [1], z = [2]
    assert pq == la.direct_sum(M([[1, 2], [2, corner]]), M([[5 - corner, 1], [3, 1]]))


def test_decompose_random_cases_all_reached():
    rng = random.Random(21)
    seen = set()
    for _ in range(200):
        m1, n1, m2, n2 = (rng.randint(1, 3) for _ in range(4))
        split = BlockSplit(m1, n1, m2, n2)
        a = la.random_separated_matrix(rng, split)
        case = la.decompose_real(a, split)
        seen.add(case.case)
        assert case.rhs == sympy_rank(a)
    assert seen == {la.SPLIT, la.ROWS, la.COLS, la.CORNER}


def test_parse_matrix_round_trip():
    a = M([[Fraction(1, 2), -3], [0, Fraction(-7, 3)]])
    assert la.parse_matrix(a.to_text()) == a
