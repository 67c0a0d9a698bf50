"""Certified minimum-rank intervals for (generalized) sign patterns.

Lower bounds are combinatorial certificates that hold for every matrix in the
qualitative class; upper bounds are explicit exact rational members of the class.
"""
from __future__ import annotations

import functools
import itertools
import logging
import math
import random
from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .linalg import RationalMatrix, int_rank, kernel_basis, rank
from .signs import (FREE, MINUS, PLUS, ZERO, GenSignPattern, PatternError,
                    is_member, refinements)

log = logging.getLogger(__name__)

ALL_ZERO = "ALL_ZERO"
NOT_RANK1 = "NOT_RANK1"
TRIANGLE = "TRIANGLE"
SIGN_NONSINGULAR = "SIGN_NONSINGULAR"
REFINEMENTS = "REFINEMENTS"
FORMULA = "FORMULA"

DEFAULT_GRID = (Fraction(1), Fraction(-1), Fraction(2), Fraction(-2), Fraction(1, 2), Fraction(-1, 2))

# Local search acceptance gates; exact re-verification follows either way.
SIGN_MARGIN = 1e-3
ZERO_TOL = 1e-6
NULL_TOL = 1e-6


@dataclass(frozen=True)
class SearchConfig:
    grid: tuple[Fraction, ...] = DEFAULT_GRID
    restarts: int = 64
    exhaustive_cells: int = 12
    denominator_bound: int = 64
    seed: int = 0
    samples: int = 4096
    refinement_cap: int = 8
    max_depth: int = 8
    try_all_separations: bool = False

    def __post_init__(self):
        grid = tuple(Fraction(g) for g in self.grid)
        if not grid or any(g == 0 for g in grid):
            raise ValueError("grid values must be nonzero")
        object.__setattr__(self, "grid", grid)
        for name in ("restarts", "exhaustive_cells", "denominator_bound", "samples"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    def with_(self, **kw) -> SearchConfig:
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return {
            "grid": [str(g) for g in self.grid],
            "restarts": self.restarts,
            "exhaustive_cells": self.exhaustive_cells,
            "denominator_bound": self.denominator_bound,
            "seed": self.seed,
            "samples": self.samples,
            "refinement_cap": self.refinement_cap,
            "max_depth": self.max_depth,
        }


@dataclass(frozen=True)
class LowerCertificate:
    kind: str
    rows: tuple[int, ...] = ()
    cols: tuple[int, ...] = ()

    def transposed(self) -> LowerCertificate:
        if self.kind == TRIANGLE:
            # the zero region above the pivots flips sides, so the order reverses
            return LowerCertificate(self.kind, self.cols[::-1], self.rows[::-1])
        return LowerCertificate(self.kind, self.cols, self.rows)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.rows or self.cols:
            d["rows"] = list(self.rows)
            d["cols"] = list(self.cols)
        return d


@dataclass(frozen=True)
class MrBounds:
    lb: int
    ub: int
    lb_certificate: LowerCertificate
    ub_certificate: RationalMatrix = field(compare=False)

    def __post_init__(self):
        if not 0 <= self.lb <= self.ub:
            raise ValueError(f"invalid interval [{self.lb}, {self.ub}]")

    @property
    def exact(self) -> bool:
        return self.lb == self.ub

    @property
    def interval(self) -> tuple[int, int]:
        return self.lb, self.ub

    def __str__(self) -> str:
        return f"{self.lb}" if self.exact else f"[{self.lb}, {self.ub}]"

    def to_dict(self, witness: bool = True) -> dict:
        d = {"lb": self.lb, "ub": self.ub, "exact": self.exact,
             "lb_certificate": self.lb_certificate.to_dict()}
        if witness:
            d["ub_certificate"] = self.ub_certificate.tolist()
        return d


# --- rank <= 1 ---------------------------------------------------------------

def _rank_one_signs(a: GenSignPattern):
    """Row/column signs e, d with e_i d_j = sign(a_ij) on the nonzero part, or None."""
    if a.free_count:
        raise PatternError("mr_le_1 requires a pattern without '#'")
    rows = [i for i in range(a.rows) if any(s != ZERO for s in a.entries[i])]
    cols = [j for j in range(a.cols) if any(a.entries[i][j] != ZERO for i in range(a.rows))]
    if any(a[i, j] == ZERO for i in rows for j in cols):
        return None
    # 2-colour the complete bipartite graph on the support; nodes are ('r', i) / ('c', j).
    colour: dict[tuple[str, int], int] = {}
    for start in [("r", i) for i in rows]:
        if start in colour:
            continue
        colour[start] = 1
        queue = deque([start])
        while queue:
            kind, k = queue.popleft()
            if kind == "r":
                nbrs = [(("c", j), 1 if a[k, j] == PLUS else -1) for j in cols]
            else:
                nbrs = [(("r", i), 1 if a[i, k] == PLUS else -1) for i in rows]
            for node, s in nbrs:
                want = colour[(kind, k)] * s
                if node not in colour:
                    colour[node] = want
                    queue.append(node)
                elif colour[node] != want:
                    return None
    e = [colour.get(("r", i), 0) for i in range(a.rows)]
    d = [colour.get(("c", j), 0) for j in range(a.cols)]
    return e, d


def mr_le_1(a: GenSignPattern) -> bool:
    """Exact test for mr(a) <= 1."""
    return _rank_one_signs(a) is not None


def rank_one_witness(a: GenSignPattern) -> RationalMatrix | None:
    signs = _rank_one_signs(a)
    if signs is None:
        return None
    e, d = signs
    return RationalMatrix.of([[Fraction(ei * dj) for dj in d] for ei in e], cols=a.cols)


# --- triangle lower bound ----------------------------------------------------

def triangle_lower_bound(a: GenSignPattern, node_budget: int = 500_000) -> tuple[int, list[int], list[int]]:
    """Largest permuted-triangular subpattern with signed diagonal.

    Returns (t, rows, cols) with a[rows[k], cols[k]] in {+,-} and
    a[rows[k], cols[l]] == 0 for l > k. ``#`` cells count as neither signed nor zero.
    Exhaustive (memoized over row/column subsets) unless ``node_budget`` runs out.
    """
    m, n = a.shape
    signed = [[a[i, j] in (PLUS, MINUS) for j in range(n)] for i in range(m)]
    zero = [[a[i, j] == ZERO for j in range(n)] for i in range(m)]
    memo: dict[tuple[int, int], tuple[int, tuple]] = {}
    budget = [node_budget]

    def best(rowmask: int, colmask: int) -> tuple[int, tuple]:
        key = (rowmask, colmask)
        if key in memo:
            return memo[key]
        budget[0] -= 1
        top: tuple[int, tuple] = (0, ())
        if budget[0] > 0:
            bound = min(bin(rowmask).count("1"), bin(colmask).count("1"))
            for j in range(n):
                if not colmask >> j & 1:
                    continue
                # earlier rows must vanish in the column of the last pivot
                zrows = sum(1 << i for i in range(m) if rowmask >> i & 1 and zero[i][j])
                for i in range(m):
                    if rowmask >> i & 1 and signed[i][j]:
                        t, seq = best(zrows & ~(1 << i), colmask & ~(1 << j))
                        if t + 1 > top[0]:
                            top = (t + 1, seq + ((i, j),))
                if top[0] == bound:
                    break
        memo[key] = top
        return top

    t, seq = best((1 << m) - 1, (1 << n) - 1)
    return t, [i for i, _ in seq], [j for _, j in seq]


def is_triangle_certificate(a: GenSignPattern, rows: Sequence[int], cols: Sequence[int]) -> bool:
    if len(rows) != len(cols) or len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
        return False
    for k, (i, j) in enumerate(zip(rows, cols)):
        if a[i, j] not in (PLUS, MINUS):
            return False
        if any(a[i, cols[l]] != ZERO for l in range(k + 1, len(cols))):
            return False
    return True


# --- sign-nonsingular lower bound --------------------------------------------

def _permutation_parity(perm: Sequence[int]) -> int:
    seen = [False] * len(perm)
    parity = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            parity = -parity
    return parity


def is_sign_nonsingular(a: GenSignPattern) -> bool:
    """Square pattern whose determinant expansion has a nonzero term and all nonzero
    terms of one sign, so every matrix in its class is nonsingular. A term touching
    a ``#`` cell has unknown sign and disqualifies the pattern."""
    n = a.rows
    if a.cols != n:
        return False
    value = {PLUS: 1, MINUS: -1}
    seen = 0
    for perm in itertools.permutations(range(n)):
        cells = [a[i, j] for i, j in enumerate(perm)]
        if ZERO in cells:
            continue
        if FREE in cells:
            return False
        term = _permutation_parity(perm)
        for s in cells:
            term *= value[s]
        if seen and term != seen:
            return False
        seen = term
    return seen != 0


def sign_nonsingular_lower_bound(a: GenSignPattern, start: int = 1, max_order: int = 6
                                 ) -> tuple[int, list[int], list[int]]:
    """Largest k (searched downward from min(shape) to ``start``) with a k x k
    sign-nonsingular subpattern."""
    top = min(a.rows, a.cols, max_order)
    for k in range(top, start - 1, -1):
        for rows in itertools.combinations(range(a.rows), k):
            for cols in itertools.combinations(range(a.cols), k):
                if is_sign_nonsingular(a.submatrix(rows, cols)):
                    return k, list(rows), list(cols)
    return 0, [], []


# --- grid upper bound --------------------------------------------------------

def _cell_options(s: str, grid: Sequence[Fraction]) -> list[Fraction]:
    if s == PLUS:
        return [g for g in grid if g > 0]
    if s == MINUS:
        return [g for g in grid if g < 0]
    if s == FREE:
        return [Fraction(0)] + list(grid)
    return [Fraction(0)]


def _generic_witness(a: GenSignPattern) -> RationalMatrix:
    one = {PLUS: 1, MINUS: -1, ZERO: 0, FREE: 0}
    return RationalMatrix.of([[Fraction(one[s]) for s in row] for row in a.entries], cols=a.cols)


def grid_upper_bound(a: GenSignPattern, cfg: SearchConfig | None = None, stop_at: int = 0
                     ) -> tuple[int, RationalMatrix]:
    """Smallest exact rank over class members with entries from the grid.

    Exhaustive when the number of non-zero cells is within ``cfg.exhaustive_cells``,
    seeded random sampling otherwise. Stops early once rank ``stop_at`` is reached.
    """
    cfg = cfg or SearchConfig()
    cells = [(i, j) for i, j, s in a.cells() if s != ZERO]
    options = [_cell_options(a[i, j], cfg.grid) for i, j in cells]
    if not options or any(not o for o in options):
        w = _generic_witness(a)
        return rank(w), w
    scale = math.lcm(*(g.denominator for g in cfg.grid))
    int_options = [[int(x * scale) for x in o] for o in options]
    m, n = a.shape

    if len(cells) <= cfg.exhaustive_cells:
        candidates = itertools.product(*(range(len(o)) for o in int_options))
    else:
        rng = random.Random(cfg.seed)
        candidates = (tuple(rng.randrange(len(o)) for o in int_options) for _ in range(cfg.samples))

    best_rank, best_choice = None, None
    for choice in candidates:
        grid = [[0] * n for _ in range(m)]
        for (i, j), o, k in zip(cells, int_options, choice):
            grid[i][j] = o[k]
        r = int_rank(grid)
        if best_rank is None or r < best_rank:
            best_rank, best_choice = r, choice
            if r <= stop_at:
                break
    entries = [[Fraction(0)] * n for _ in range(m)]
    for (i, j), o, k in zip(cells, options, best_choice):
        entries[i][j] = o[k]
    w = RationalMatrix.of(entries, cols=n)
    return best_rank, w


# --- local search upper bound ------------------------------------------------

def _penalty(x, m, n, r, sgn, signed, zmask):
    u = x[: m * r].reshape(m, r)
    v = x[m * r:].reshape(r, n)
    prod = u @ v
    short = np.where(signed, np.maximum(0.0, 1.0 - sgn * prod), 0.0)
    zval = np.where(zmask, prod, 0.0)
    f = float(np.sum(short ** 2) + np.sum(zval ** 2))
    g = -2.0 * sgn * short + 2.0 * zval
    return f, np.concatenate([(g @ v.T).ravel(), (u.T @ g).ravel()])


def _null_projection(u: np.ndarray, v: np.ndarray, zmask: np.ndarray) -> np.ndarray:
    """Project each column of ``v`` onto the null space of the rows of ``u`` forced to zero."""
    v = v.copy()
    for j in range(v.shape[1]):
        rows = np.flatnonzero(zmask[:, j])
        if rows.size == 0:
            continue
        _, sv, vt = np.linalg.svd(u[rows], full_matrices=True)
        nullity = vt.shape[0] - int(np.sum(sv > NULL_TOL * max(1.0, sv.max(initial=0.0))))
        basis = vt[vt.shape[0] - nullity:].T
        v[:, j] = basis @ (basis.T @ v[:, j]) if nullity else 0.0
    return v


def _rationalize_factor(x: np.ndarray, bound: int) -> list[list[Fraction]]:
    """Round rows to rationals, keeping rows that are numerically dependent exactly dependent.

    Each row is first fitted against the rows already kept as independent; a
    small residual means it is replaced by the exact rational combination.
    """
    def q(t):
        return Fraction(float(t)).limit_denominator(bound)

    basis_f: list[np.ndarray] = []
    basis_q: list[list[Fraction]] = []
    out = []
    for row in x:
        scale = max(1.0, float(np.abs(row).max()))
        if basis_f:
            bm = np.array(basis_f).T
            coef, *_ = np.linalg.lstsq(bm, row, rcond=None)
            if np.abs(bm @ coef - row).max() < NULL_TOL * scale:
                cq = [q(c) for c in coef]
                out.append([sum((c * b[k] for c, b in zip(cq, basis_q)), Fraction(0))
                            for k in range(len(row))])
                continue
        rq = [q(t) for t in row]
        basis_f.append(np.asarray(row, dtype=float))
        basis_q.append(rq)
        out.append(rq)
    return out


def _exact_columns(uq: RationalMatrix, v: np.ndarray, zero_cols: list[list[int]], bound: int
                   ) -> RationalMatrix | None:
    """Exact right factor whose product with ``uq`` vanishes on the forced-zero cells."""
    r = uq.cols
    cols = []
    for j, zrows in enumerate(zero_cols):
        if zrows:
            basis = kernel_basis(uq.submatrix(zrows, range(r)))
            if not basis:
                cols.append((Fraction(0),) * r)
                continue
            kb = np.array([[float(t) for t in b] for b in basis]).T
            coef, *_ = np.linalg.lstsq(kb, v[:, j], rcond=None)
            cq = [Fraction(float(c)).limit_denominator(bound) for c in coef]
            cols.append(tuple(sum((c * b[k] for c, b in zip(cq, basis)), Fraction(0)) for k in range(r)))
        else:
            cols.append(tuple(Fraction(float(t)).limit_denominator(bound) for t in v[:, j]))
    return RationalMatrix.of(cols, cols=r).T


def _exact_candidate(a: GenSignPattern, u: np.ndarray, v: np.ndarray, bound: int) -> RationalMatrix | None:
    m, n = a.shape
    zmask = np.array([[s == ZERO for s in row] for row in a.entries])
    for transpose in (False, True):
        if transpose:
            uu, vv, zm, pat = v.T, u.T, zmask.T, a.transpose()
        else:
            uu, vv, zm, pat = u, v, zmask, a
        uq = RationalMatrix.of(_rationalize_factor(uu, bound), cols=uu.shape[1])
        zero_cols = [list(np.flatnonzero(zm[:, j])) for j in range(zm.shape[1])]
        vq = _exact_columns(uq, vv, zero_cols, bound)
        w = uq @ vq
        if transpose:
            w = w.T
        if is_member(w, a):
            return w
    return None


def local_search_upper_bound(a: GenSignPattern, target: int, cfg: SearchConfig | None = None
                             ) -> RationalMatrix | None:
    """Seeded multi-restart factor search for an exact class member of rank <= target."""
    cfg = cfg or SearchConfig()
    if target < 1:
        raise ValueError("target rank must be at least 1")
    m, n = a.shape
    sgn = np.array([[{PLUS: 1.0, MINUS: -1.0}.get(s, 0.0) for s in row] for row in a.entries])
    signed = sgn != 0
    zmask = np.array([[s == ZERO for s in row] for row in a.entries])
    rng = np.random.default_rng(cfg.seed)
    r = target
    for restart in range(cfg.restarts):
        x0 = rng.standard_normal((m + n) * r)
        res = minimize(_penalty, x0, args=(m, n, r, sgn, signed, zmask), jac=True,
                       method="L-BFGS-B", options={"maxiter": 400, "gtol": 1e-12, "ftol": 1e-15})
        u = res.x[: m * r].reshape(m, r)
        v = res.x[m * r:].reshape(r, n)
        v = _null_projection(u, v, zmask)
        prod = u @ v
        if np.any(np.abs(prod[zmask]) > ZERO_TOL) or np.any((sgn * prod)[signed] < SIGN_MARGIN):
            continue
        w = _exact_candidate(a, u, v, cfg.denominator_bound)
        if w is not None and rank(w) <= target:
            log.debug("local search hit rank %d on restart %d", target, restart)
            return w
    return None


# --- combined bounds ---------------------------------------------------------

def _symmetry_variants(a: GenSignPattern):
    return [
        (a, False, False),
        (a.negate(), True, False),
        (a.transpose(), False, True),
        (a.negate().transpose(), True, True),
    ]


def mr_bounds(a: GenSignPattern, cfg: SearchConfig | None = None) -> MrBounds:
    """Certified interval for mr(a).

    Patterns with ``#`` are expanded into refinements (interval minimum). Plain
    patterns are solved on a canonical representative of {A, -A, A^T, -A^T} so
    the answer is invariant under negation and transposition.
    """
    cfg = cfg or SearchConfig()
    if a.free_count:
        return _generalized_bounds(a, cfg)
    canon, neg, tr = min(_symmetry_variants(a), key=lambda v: v[0].entries)
    b = _plain_bounds(canon, cfg)
    w, cert = b.ub_certificate, b.lb_certificate
    if tr:
        w, cert = w.T, cert.transposed()
    if neg:
        w = -w
    return MrBounds(b.lb, b.ub, cert, w)


def _generalized_bounds(c: GenSignPattern, cfg: SearchConfig) -> MrBounds:
    parts = [mr_bounds(a, cfg) for a in refinements(c, cfg.refinement_cap)]
    lb = min(p.lb for p in parts)
    best = min(parts, key=lambda p: p.ub)
    return MrBounds(lb, best.ub, LowerCertificate(REFINEMENTS), best.ub_certificate)


@functools.lru_cache(maxsize=1 << 16)
def _plain_bounds(a: GenSignPattern, cfg: SearchConfig) -> MrBounds:
    if a.is_zero():
        return MrBounds(0, 0, LowerCertificate(ALL_ZERO), RationalMatrix.zeros(*a.shape))
    w1 = rank_one_witness(a)
    if w1 is not None:
        return MrBounds(1, 1, LowerCertificate(ALL_ZERO), w1)
    lb, cert = 2, LowerCertificate(NOT_RANK1)
    t, rows, cols = triangle_lower_bound(a)
    if t > lb:
        lb, cert = t, LowerCertificate(TRIANGLE, tuple(rows), tuple(cols))
    if lb < min(a.shape):
        k, rows, cols = sign_nonsingular_lower_bound(a, start=lb + 1)
        if k > lb:
            lb, cert = k, LowerCertificate(SIGN_NONSINGULAR, tuple(rows), tuple(cols))

    ub, w = grid_upper_bound(a, cfg, stop_at=lb)
    for target in range(max(lb, 1), ub):
        found = local_search_upper_bound(a, target, cfg)
        if found is not None:
            ub, w = rank(found), found
            break
    if not is_member(w, a) or rank(w) != ub:
        raise AssertionError("upper-bound witness failed exact verification")
    return MrBounds(lb, ub, cert, w)


def verify_bounds(a: GenSignPattern, b: MrBounds) -> bool:
    """Re-check the certificates of ``b`` from scratch."""
    w = b.ub_certificate
    if not is_member(w, a) or rank(w) != b.ub:
        return False
    cert = b.lb_certificate
    if cert.kind == TRIANGLE:
        return len(cert.rows) == b.lb and is_triangle_certificate(a, cert.rows, cert.cols)
    if cert.kind == SIGN_NONSINGULAR:
        return len(cert.rows) == b.lb and is_sign_nonsingular(a.submatrix(cert.rows, cert.cols))
    if cert.kind == NOT_RANK1:
        return b.lb <= 2 and (b.lb < 2 or not mr_le_1(a))
    if cert.kind == ALL_ZERO:
        return b.lb == 0 or (b.lb == 1 and not a.is_zero())
    return True
