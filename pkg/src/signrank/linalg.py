"""Exact rational linear algebra and the rank identities behind the 1-separation formula.

Everything here is exact: ranks come from fraction-free (Bareiss) elimination on
integer-scaled rows, kernels from rational row reduction.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

Vector = tuple[Fraction, ...]


class ShapeError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class ConsistencyError(AssertionError):
    """An identity that must hold exactly did not hold."""


@dataclass(frozen=True)
class RationalMatrix:
    """Immutable matrix of ``Fraction`` entries. Zero-sized dimensions are allowed."""

    entries: tuple[tuple[Fraction, ...], ...]
    ncols: int = field(default=-1, compare=False, repr=False)

    def __post_init__(self):
        ents = tuple(tuple(Fraction(x) for x in row) for row in self.entries)
        object.__setattr__(self, "entries", ents)
        width = len(ents[0]) if ents else max(self.ncols, 0)
        if any(len(r) != width for r in ents):
            raise ShapeError("ragged matrix")
        object.__setattr__(self, "ncols", width)

    @classmethod
    def of(cls, rows: Iterable[Iterable], cols: int | None = None) -> RationalMatrix:
        rows = [list(r) for r in rows]
        return cls(tuple(tuple(r) for r in rows), ncols=cols if cols is not None else -1)

    @classmethod
    def zeros(cls, m: int, n: int) -> RationalMatrix:
        return cls(tuple((Fraction(0),) * n for _ in range(m)), ncols=n)

    @classmethod
    def identity(cls, n: int) -> RationalMatrix:
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)), ncols=n)

    @classmethod
    def column(cls, v: Sequence) -> RationalMatrix:
        return cls(tuple((x,) for x in v), ncols=1)

    @classmethod
    def row(cls, v: Sequence) -> RationalMatrix:
        return cls((tuple(v),), ncols=len(v))

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return self.ncols

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @property
    def T(self) -> RationalMatrix:
        if not self.rows:
            return RationalMatrix(((),) * self.cols, ncols=0)
        return RationalMatrix(tuple(zip(*self.entries)), ncols=self.rows)

    def __neg__(self) -> RationalMatrix:
        return RationalMatrix(tuple(tuple(-x for x in r) for r in self.entries), ncols=self.cols)

    def __add__(self, other: RationalMatrix) -> RationalMatrix:
        if self.shape != other.shape:
            raise ShapeError(f"cannot add {self.shape} and {other.shape}")
        return RationalMatrix(
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)),
            ncols=self.cols)

    def scale(self, t) -> RationalMatrix:
        t = Fraction(t)
        return RationalMatrix(tuple(tuple(t * x for x in r) for r in self.entries), ncols=self.cols)

    def __matmul__(self, other: RationalMatrix) -> RationalMatrix:
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.shape} by {other.shape}")
        cols = other.T.entries
        return RationalMatrix(
            tuple(tuple(sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in cols)
                  for r in self.entries),
            ncols=other.cols)

    def matvec(self, v: Sequence) -> Vector:
        return tuple(sum((a * Fraction(b) for a, b in zip(r, v)), Fraction(0)) for r in self.entries)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> RationalMatrix:
        return RationalMatrix(tuple(tuple(self.entries[i][j] for j in cols) for i in rows),
                              ncols=len(cols))

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.entries for x in r)

    def to_text(self) -> str:
        return "".join(" ".join(str(x) for x in r) + "\n" for r in self.entries)

    def tolist(self) -> list[list[str]]:
        return [[str(x) for x in r] for r in self.entries]

    def __str__(self) -> str:
        return self.to_text().rstrip("\n")


def hstack(*blocks: RationalMatrix) -> RationalMatrix:
    m = blocks[0].rows
    if any(b.rows != m for b in blocks):
        raise ShapeError("hstack needs equal row counts")
    return RationalMatrix(tuple(sum((b.entries[i] for b in blocks), ()) for i in range(m)),
                          ncols=sum(b.cols for b in blocks))


def vstack(*blocks: RationalMatrix) -> RationalMatrix:
    n = blocks[0].cols
    if any(b.cols != n for b in blocks):
        raise ShapeError("vstack needs equal column counts")
    return RationalMatrix(sum((b.entries for b in blocks), ()), ncols=n)


def block(grid: Sequence[Sequence[RationalMatrix]]) -> RationalMatrix:
    return vstack(*(hstack(*row) for row in grid))


def direct_sum(c: RationalMatrix, d: RationalMatrix) -> RationalMatrix:
    return block([[c, RationalMatrix.zeros(c.rows, d.cols)],
                  [RationalMatrix.zeros(d.rows, c.cols), d]])


def parse_matrix(text: str) -> RationalMatrix:
    rows = []
    for line in text.splitlines():
        s = line.strip()
        if s and not s.startswith(";"):
            rows.append([Fraction(tok) for tok in s.split()])
    return RationalMatrix.of(rows)


# --- rank and kernels --------------------------------------------------------

def _integer_rows(entries) -> list[list[int]]:
    out = []
    for row in entries:
        den = 1
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
        out.append([int(x * den) for x in row])
    return out


def int_rank(rows: list[list[int]]) -> int:
    """Rank of an integer matrix by Bareiss elimination. Mutates ``rows``."""
    m = len(rows)
    if m == 0:
        return 0
    n = len(rows[0])
    r = 0
    prev = 1
    for c in range(n):
        piv = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pr = rows[r]
        p = pr[c]
        for i in range(r + 1, m):
            ri = rows[i]
            f = ri[c]
            for j in range(c + 1, n):
                ri[j] = (p * ri[j] - f * pr[j]) // prev
            ri[c] = 0
        prev = p
        r += 1
        if r == m:
            break
    return r


def rank(a: RationalMatrix) -> int:
    """Exact rank over the rationals."""
    if a.rows == 0 or a.cols == 0:
        return 0
    return int_rank(_integer_rows(a.entries))


def rref(a: RationalMatrix) -> tuple[list[list[Fraction]], list[int]]:
    m = [list(r) for r in a.entries]
    pivots = []
    r = 0
    for c in range(a.cols):
        piv = next((i for i in range(r, a.rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(a.rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == a.rows:
            break
    return m, pivots


def kernel_basis(a: RationalMatrix) -> list[Vector]:
    """Basis of the right null space; empty iff ``a`` has full column rank."""
    m, pivots = rref(a)
    free = [c for c in range(a.cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * a.cols
        v[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -m[r][f]
        basis.append(tuple(v))
    return basis


def cokernel_basis(a: RationalMatrix) -> list[Vector]:
    return kernel_basis(a.T)


def solve(a: RationalMatrix, b: Sequence) -> Vector | None:
    """One exact solution of ``a x = b``, or None if the system is inconsistent."""
    aug = hstack(a, RationalMatrix.column(b))
    m, pivots = rref(aug)
    if a.cols in pivots:
        return None
    x = [Fraction(0)] * a.cols
    for r, pc in enumerate(pivots):
        x[pc] = m[r][a.cols]
    return tuple(x)


def in_row_space(v: Sequence, a: RationalMatrix) -> bool:
    return solve(a.T, v) is not None


def in_column_space(v: Sequence, a: RationalMatrix) -> bool:
    return solve(a, v) is not None


# --- subdirect sums ----------------------------------------------------------

def subdirect_sum(c: RationalMatrix, d: RationalMatrix, k: int) -> RationalMatrix:
    """k-subdirect sum: C's trailing k x k block overlaps (and is added to) D's leading one."""
    if k < 0 or k > min(c.rows, c.cols, d.rows, d.cols):
        raise ShapeError(f"k={k} too large for shapes {c.shape} and {d.shape}")
    m, n = c.rows + d.rows - k, c.cols + d.cols - k
    grid = [[Fraction(0)] * n for _ in range(m)]
    for i, row in enumerate(c.entries):
        for j, x in enumerate(row):
            grid[i][j] += x
    oi, oj = c.rows - k, c.cols - k
    for i, row in enumerate(d.entries):
        for j, x in enumerate(row):
            grid[oi + i][oj + j] += x
    return RationalMatrix.of(grid, cols=n)


def check_subdirect_inequality(c: RationalMatrix, d: RationalMatrix, k: int) -> bool:
    return rank(subdirect_sum(c, d, k)) <= rank(c) + rank(d)


# --- bordered rank identity (vertex addition) --------------------------------

@dataclass(frozen=True)
class BorderedIdentity:
    bordered: RationalMatrix
    p: RationalMatrix
    q: RationalMatrix
    reduced: RationalMatrix
    bordered_rank: int
    expected_rank: int


def bordered_transforms(b: RationalMatrix, a, c) -> BorderedIdentity:
    """Bordered matrix [[0,a,0],[c,b11,B12],[0,B21,B22]] with the P, Q that reduce it to
    [[0,1,0],[1,0,0],[0,0,B22]]."""
    a, c = Fraction(a), Fraction(c)
    if a == 0 or c == 0:
        raise PreconditionError("a and c must be nonzero")
    m, n = b.shape
    if m < 1 or n < 1:
        raise PreconditionError("B must be at least 1x1")
    b11 = b[0, 0]
    b12 = b.submatrix([0], range(1, n))
    b21 = b.submatrix(range(1, m), [0])
    b22 = b.submatrix(range(1, m), range(1, n))
    z = RationalMatrix.zeros
    bordered = block([
        [z(1, 1), RationalMatrix.of([[a]]), z(1, n - 1)],
        [RationalMatrix.of([[c]]), RationalMatrix.of([[b11]]), b12],
        [z(m - 1, 1), b21, b22],
    ])
    p = block([
        [RationalMatrix.of([[1 / a, 0]]), z(1, m - 1)],
        [RationalMatrix.of([[-b11 / (2 * a), 1]]), z(1, m - 1)],
        [hstack(b21.scale(-1 / a), z(m - 1, 1)), RationalMatrix.identity(m - 1)],
    ])
    q = block([
        [RationalMatrix.of([[1 / c, -b11 / (2 * c)]]), b12.scale(-1 / c)],
        [RationalMatrix.of([[0, 1]]), z(1, n - 1)],
        [z(n - 1, 2), RationalMatrix.identity(n - 1)],
    ])
    reduced = p @ bordered @ q
    return BorderedIdentity(bordered, p, q, reduced, rank(bordered), rank(b22) + 2)


def bordered_rank_identity(b: RationalMatrix, a, c) -> tuple[int, int]:
    ident = bordered_transforms(b, a, c)
    return ident.bordered_rank, ident.expected_rank


# --- adjoin identity ---------------------------------------------------------

@dataclass(frozen=True)
class Split2:
    """2 x 2 block split: the leading block is m1 x n1."""
    m1: int
    n1: int


def _quadrants(a: RationalMatrix, split: Split2):
    m1, n1 = split.m1, split.n1
    r1, r2 = range(m1), range(m1, a.rows)
    c1, c2 = range(n1), range(n1, a.cols)
    return (a.submatrix(r1, c1), a.submatrix(r1, c2),
            a.submatrix(r2, c1), a.submatrix(r2, c2))


def adjoin_matrix(a: RationalMatrix, split: Split2, x: Sequence, y: Sequence) -> RationalMatrix:
    """[[0, x^T A21, 0], [A12 y, A11, A12], [0, A21, A22]] for x in coker(A22), y in ker(A22)."""
    a11, a12, a21, a22 = _quadrants(a, split)
    x = tuple(Fraction(t) for t in x)
    y = tuple(Fraction(t) for t in y)
    if len(x) != a22.rows or len(y) != a22.cols:
        raise ShapeError("kernel vector lengths do not match A22")
    if any(a22.T.matvec(x)) or any(a22.matvec(y)):
        raise PreconditionError("x must lie in ker(A22^T) and y in ker(A22)")
    top = RationalMatrix.row(a21.T.matvec(x)) if a21.cols else RationalMatrix.zeros(1, 0)
    left = RationalMatrix.column(a12.matvec(y)) if a12.rows else RationalMatrix.zeros(0, 1)
    z = RationalMatrix.zeros
    return block([
        [z(1, 1), top, z(1, a22.cols)],
        [left, a11, a12],
        [z(a22.rows, 1), a21, a22],
    ])


def adjoin_rank_identity(a: RationalMatrix, split: Split2, x: Sequence, y: Sequence) -> tuple[int, int]:
    return rank(adjoin_matrix(a, split, x, y)), rank(a)


# --- four-case decomposition of a 1-separated real matrix --------------------

@dataclass(frozen=True)
class BlockSplit:
    m1: int
    n1: int
    m2: int
    n2: int

    def __post_init__(self):
        if min(self.m1, self.n1, self.m2, self.n2) < 1:
            raise ShapeError("all block dimensions must be at least 1")

    @property
    def shape(self) -> tuple[int, int]:
        return self.m1 + self.m2 + 1, self.n1 + self.n2 + 1

    def index_sets(self):
        m1, n1 = self.m1, self.n1
        rows = (range(m1), m1, range(m1 + 1, m1 + 1 + self.m2))
        cols = (range(n1), n1, range(n1 + 1, n1 + 1 + self.n2))
        return rows, cols


SPLIT, ROWS, COLS, CORNER = "SPLIT", "ROWS", "COLS", "CORNER"


@dataclass(frozen=True)
class DecompCase:
    case: str
    v: Vector | None = None
    z: Vector | None = None
    x: Vector | None = None
    y: Vector | None = None
    lhs: int = 0
    rhs: int = 0


@dataclass(frozen=True)
class SeparatedBlocks:
    a11: RationalMatrix
    a12: RationalMatrix
    a21: RationalMatrix
    a22: Fraction
    a23: RationalMatrix
    a32: RationalMatrix
    a33: RationalMatrix


def split_blocks(a: RationalMatrix, split: BlockSplit) -> SeparatedBlocks:
    if a.shape != split.shape:
        raise ShapeError(f"matrix shape {a.shape} does not match split {split.shape}")
    (r1, r, r2), (c1, c, c2) = split.index_sets()
    if not a.submatrix(r1, c2).is_zero() or not a.submatrix(r2, c1).is_zero():
        raise ShapeError("matrix does not have the 1-separation zero blocks")
    return SeparatedBlocks(
        a.submatrix(r1, c1), a.submatrix(r1, [c]), a.submatrix([r], c1), a[r, c],
        a.submatrix([r], c2), a.submatrix(r2, [c]), a.submatrix(r2, c2))


def dot(u: Sequence, v: Sequence) -> Fraction:
    return sum((Fraction(a) * Fraction(b) for a, b in zip(u, v)), Fraction(0))


def decompose_real(a: RationalMatrix, split: BlockSplit) -> DecompCase:
    """Decide which of the four rank decompositions applies, following the proof's case order.

    The case is chosen by two exact tests: whether the cut row annihilates
    ker(A11 (+) A33), and whether the cut column is annihilated by its cokernel.
    """
    b = split_blocks(a, split)
    ra = rank(a)
    diag = direct_sum(b.a11, b.a33)
    row_border = hstack(b.a21, b.a23).entries[0]
    col_border = vstack(b.a12, b.a32).T.entries[0]
    x_hit = next((x for x in kernel_basis(diag) if dot(row_border, x) != 0), None)
    y_hit = next((y for y in cokernel_basis(diag) if dot(y, col_border) != 0), None)

    if x_hit is None and y_hit is None:
        v = solve(b.a11.T, b.a21.entries[0])
        z = solve(b.a11, b.a12.T.entries[0])
        if v is None or z is None:
            raise ConsistencyError("border not in the row/column space of A11")
        corner = dot(v, b.a11.matvec(z))
        r_mat = block([[b.a11, b.a12], [b.a21, RationalMatrix.of([[corner]])]])
        s_mat = block([[RationalMatrix.of([[b.a22 - corner]]), b.a23], [b.a32, b.a33]])
        lhs = rank(r_mat) + rank(s_mat)
        result = DecompCase(SPLIT, v=v, z=z, lhs=lhs, rhs=ra)
    elif x_hit is None:
        lhs = rank(vstack(b.a11, b.a21)) + rank(vstack(b.a23, b.a33)) + 1
        result = DecompCase(ROWS, y=y_hit, lhs=lhs, rhs=ra)
        if not (in_row_space(b.a21.entries[0], b.a11) and in_row_space(b.a23.entries[0], b.a33)):
            raise ConsistencyError("ROWS case without row-space membership of the border")
    elif y_hit is None:
        lhs = rank(hstack(b.a11, b.a12)) + rank(hstack(b.a32, b.a33)) + 1
        result = DecompCase(COLS, x=x_hit, lhs=lhs, rhs=ra)
        if not (in_column_space(b.a12.T.entries[0], b.a11)
                and in_column_space(b.a32.T.entries[0], b.a33)):
            raise ConsistencyError("COLS case without column-space membership of the border")
    else:
        lhs = rank(b.a11) + rank(b.a33) + 2
        result = DecompCase(CORNER, x=x_hit, y=y_hit, lhs=lhs, rhs=ra)
    if result.lhs != result.rhs:
        raise ConsistencyError(f"{result.case}: {result.lhs} != rank {result.rhs}")
    return result


def split_case_transforms(a: RationalMatrix, split: BlockSplit, v: Sequence, z: Sequence):
    """P, Q with P A Q = R (+) S in the SPLIT case; returned for introspection."""
    m1, n1, m2, n2 = split.m1, split.n1, split.m2, split.n2
    zm = RationalMatrix.zeros
    vt = RationalMatrix.row(v)
    p = block([
        [RationalMatrix.identity(m1), zm(m1, 1), zm(m1, m2)],
        [vt, zm(1, 1), zm(1, m2)],
        [-vt, RationalMatrix.of([[1]]), zm(1, m2)],
        [zm(m2, m1), zm(m2, 1), RationalMatrix.identity(m2)],
    ])
    zc = RationalMatrix.column(z)
    q = block([
        [RationalMatrix.identity(n1), zc, -zc, zm(n1, n2)],
        [zm(1, n1), zm(1, 1), RationalMatrix.of([[1]]), zm(1, n2)],
        [zm(n2, n1), zm(n2, 1), zm(n2, 1), RationalMatrix.identity(n2)],
    ])
    return p, q


# --- random generators -------------------------------------------------------

NUMERATORS = range(-9, 10)
DENOMINATORS = (1, 2, 3)


def random_rational(rng: random.Random) -> Fraction:
    return Fraction(rng.choice(NUMERATORS), rng.choice(DENOMINATORS))


def random_nonzero_rational(rng: random.Random) -> Fraction:
    while True:
        x = random_rational(rng)
        if x:
            return x


def random_matrix(rng: random.Random, m: int, n: int, max_rank: int | None = None) -> RationalMatrix:
    """Random rational matrix; with ``max_rank`` it is built as a product of thin factors."""
    if max_rank is not None and max_rank < min(m, n):
        left = random_matrix(rng, m, max_rank)
        right = random_matrix(rng, max_rank, n)
        return left @ right if max_rank else RationalMatrix.zeros(m, n)
    return RationalMatrix.of([[random_rational(rng) for _ in range(n)] for _ in range(m)], cols=n)


def random_separated_matrix(rng: random.Random, split: BlockSplit, low_rank: bool = True) -> RationalMatrix:
    """Random real matrix with the 1-separation zero blocks of ``split``."""
    m1, n1, m2, n2 = split.m1, split.n1, split.m2, split.n2
    def blk(m, n):
        if low_rank and rng.random() < 0.5:
            return random_matrix(rng, m, n, max_rank=rng.randint(0, min(m, n)))
        return random_matrix(rng, m, n)
    z = RationalMatrix.zeros
    border = lambda m, n: random_matrix(rng, m, n) if rng.random() < 0.8 else z(m, n)
    a11 = blk(m1, n1)
    a33 = blk(m2, n2)
    # Bias borders into the block spaces so every decomposition case is exercised.
    a12 = a11 @ random_matrix(rng, n1, 1) if rng.random() < 0.5 else border(m1, 1)
    a21 = random_matrix(rng, 1, m1) @ a11 if rng.random() < 0.5 else border(1, n1)
    a32 = a33 @ random_matrix(rng, n2, 1) if rng.random() < 0.5 else border(m2, 1)
    a23 = random_matrix(rng, 1, m2) @ a33 if rng.random() < 0.5 else border(1, n2)
    return block([
        [a11, a12, z(m1, n2)],
        [a21, RationalMatrix.of([[random_rational(rng)]]), a23],
        [z(m2, n1), a32, a33],
    ])
