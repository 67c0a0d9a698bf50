"""Randomized verification suites: rank identities, term inequalities, invariances."""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg as la
from .engine import SearchConfig, mr_bounds
from .formula import formula_terms, random_separated_pattern
from .linalg import BlockSplit, RationalMatrix, Split2, rank


@dataclass
class SuiteResult:
    name: str
    trials: int = 0
    violations: list[str] = field(default_factory=list)
    counts: Counter = field(default_factory=Counter)

    @property
    def ok(self) -> bool:
        return not self.violations

    def fail(self, msg: str) -> None:
        self.violations.append(msg)

    def to_dict(self) -> dict:
        return {"name": self.name, "trials": self.trials, "violations": len(self.violations),
                "details": self.violations[:10], "counts": dict(sorted(self.counts.items()))}


def subdirect_suite(trials: int, rng: random.Random) -> SuiteResult:
    res = SuiteResult("subdirect_sum")
    for t in range(trials):
        mc, nc, md, nd = (rng.randint(1, 6) for _ in range(4))
        c = la.random_matrix(rng, mc, nc, max_rank=rng.randint(0, min(mc, nc)))
        d = la.random_matrix(rng, md, nd, max_rank=rng.randint(0, min(md, nd)))
        k = rng.randint(0, min(3, mc, nc, md, nd))
        lhs = rank(la.subdirect_sum(c, d, k))
        rhs = rank(la.direct_sum(c, d))
        res.trials += 1
        res.counts["equal" if lhs == rhs else "strict"] += 1
        if lhs > rhs or not la.check_subdirect_inequality(c, d, k):
            res.fail(f"trial {t}: rank {lhs} > {rhs} (k={k})")
    return res


def vertexadd_suite(trials: int, rng: random.Random) -> SuiteResult:
    res = SuiteResult("bordered_rank")
    for t in range(trials):
        m, n = rng.randint(1, 6), rng.randint(1, 6)
        b = la.random_matrix(rng, m, n, max_rank=rng.randint(0, min(m, n)))
        ident = la.bordered_transforms(b, la.random_nonzero_rational(rng), la.random_nonzero_rational(rng))
        res.trials += 1
        if ident.bordered_rank != ident.expected_rank:
            res.fail(f"trial {t}: {ident.bordered_rank} != {ident.expected_rank}")
        b22 = b.submatrix(range(1, m), range(1, n))
        z = RationalMatrix.zeros
        target = la.block([[RationalMatrix.of([[0, 1], [1, 0]]), z(2, n - 1)], [z(m - 1, 2), b22]])
        if ident.reduced != target:
            res.fail(f"trial {t}: P M Q is not the reduced form")
    return res


def adjoin_suite(trials: int, rng: random.Random) -> SuiteResult:
    res = SuiteResult("adjoin_rank")
    for t in range(trials):
        m1, n1, m2, n2 = (rng.randint(1, 4) for _ in range(4))
        a22 = la.random_matrix(rng, m2, n2, max_rank=rng.randint(0, min(m2, n2) - 1))
        a = la.block([[la.random_matrix(rng, m1, n1), la.random_matrix(rng, m1, n2)],
                      [la.random_matrix(rng, m2, n1), a22]])
        xs, ys = la.cokernel_basis(a22), la.kernel_basis(a22)
        x = _combination(rng, xs, m2)
        y = _combination(rng, ys, n2)
        lhs, rhs = la.adjoin_rank_identity(a, Split2(m1, n1), x, y)
        res.trials += 1
        if lhs != rhs:
            res.fail(f"trial {t}: {lhs} != {rhs}")
    return res


def _combination(rng: random.Random, basis, length: int):
    out = [Fraction(0)] * length
    for v in basis:
        coef = la.random_rational(rng)
        out = [o + coef * x for o, x in zip(out, v)]
    return out


def decomp_suite(trials: int, rng: random.Random) -> SuiteResult:
    res = SuiteResult("decomposition")
    for t in range(trials):
        while True:
            m1, n1, m2, n2 = (rng.randint(1, 3) for _ in range(4))
            if m1 + m2 + 1 <= 7 and n1 + n2 + 1 <= 7:
                break
        split = BlockSplit(m1, n1, m2, n2)
        a = la.random_separated_matrix(rng, split)
        res.trials += 1
        try:
            case = la.decompose_real(a, split)
        except la.ConsistencyError as exc:
            res.fail(f"trial {t}: {exc}")
            continue
        res.counts[case.case] += 1
        b = la.split_blocks(a, split)
        ra = rank(a)
        if case.case == la.SPLIT:
            p, q = la.split_case_transforms(a, split, case.v, case.z)
            corner = la.dot(case.v, b.a11.matvec(case.z))
            rm = la.block([[b.a11, b.a12], [b.a21, RationalMatrix.of([[corner]])]])
            sm = la.block([[RationalMatrix.of([[b.a22 - corner]]), b.a23], [b.a32, b.a33]])
            ok = rank(rm) + rank(sm) == ra and p @ a @ q == la.direct_sum(rm, sm)
        elif case.case == la.ROWS:
            ok = rank(la.vstack(b.a11, b.a21)) + rank(la.vstack(b.a23, b.a33)) + 1 == ra
            ok = ok and la.in_row_space(b.a21.entries[0], b.a11) and la.in_row_space(b.a23.entries[0], b.a33)
        elif case.case == la.COLS:
            ok = rank(la.hstack(b.a11, b.a12)) + rank(la.hstack(b.a32, b.a33)) + 1 == ra
            ok = ok and la.in_column_space(b.a12.T.entries[0], b.a11) \
                and la.in_column_space(b.a32.T.entries[0], b.a33)
        else:
            ok = rank(b.a11) + rank(b.a33) + 2 == ra
        if not ok:
            res.fail(f"trial {t}: {case.case} equation fails on recomputation")
    return res


def lemma_suites(trials: int = 200, seed: int = 0) -> list[SuiteResult]:
    rng = random.Random(seed)
    return [suite(trials, rng) for suite in (subdirect_suite, vertexadd_suite, adjoin_suite, decomp_suite)]


def random_split(rng: random.Random, max_rows: int = 4, max_cols: int = 4) -> tuple[int, int, int, int]:
    rows, cols = rng.randint(3, max_rows), rng.randint(3, max_cols)
    m1 = rng.randint(1, rows - 2)
    n1 = rng.randint(1, cols - 2)
    return m1, n1, rows - 1 - m1, cols - 1 - n1


def inequality_suite(trials: int = 500, seed: int = 0, cfg: SearchConfig | None = None,
                     max_rows: int = 4, max_cols: int = 4) -> SuiteResult:
    """Every term bounds mr(M) from above, on random exactly resolved patterns."""
    cfg = cfg or SearchConfig()
    rng = random.Random(seed)
    res = SuiteResult("term_inequalities")
    attempts = 0
    while res.trials < trials and attempts < 20 * trials:
        attempts += 1
        m, s = random_separated_pattern(rng, *random_split(rng, max_rows, max_cols))
        fr = formula_terms(m, s, cfg)
        if not fr.direct.exact or not all(t.exact for t in fr.terms):
            res.counts["skipped_inexact"] += 1
            continue
        res.trials += 1
        for t in fr.terms:
            if t.lb < fr.direct.lb:
                res.fail(f"{m.entries}: T{t.index}={t.lb} < mr={fr.direct.lb}")
        if min(t.lb for t in fr.terms) != fr.direct.lb:
            res.fail(f"{m.entries}: min term {min(t.lb for t in fr.terms)} != mr {fr.direct.lb}")
        res.counts[f"T{fr.achieving_term}"] += 1
    return res


def invariance_suite(trials: int = 200, seed: int = 0, cfg: SearchConfig | None = None,
                     max_rows: int = 4, max_cols: int = 4) -> SuiteResult:
    """mr and formula values survive transposition and negation."""
    cfg = cfg or SearchConfig()
    rng = random.Random(seed)
    res = SuiteResult("invariance")
    attempts = 0
    while res.trials < trials and attempts < 20 * trials:
        attempts += 1
        m, s = random_separated_pattern(rng, *random_split(rng, max_rows, max_cols))
        base = formula_terms(m, s, cfg)
        if not base.result.exact:
            res.counts["skipped_inexact"] += 1
            continue
        res.trials += 1
        tr = formula_terms(m.transpose(), s.transposed(), cfg)
        ng = formula_terms(m.negate(), s, cfg)
        v, vt, vn = (tuple((t.lb, t.ub) for t in r.terms) for r in (base, tr, ng))
        checks = {
            "mr transpose": mr_bounds(m.transpose(), cfg).interval == base.direct.interval,
            "mr negate": mr_bounds(m.negate(), cfg).interval == base.direct.interval,
            "formula transpose": tr.result.interval == base.result.interval,
            "formula negate": ng.result.interval == base.result.interval,
            "T2<->T3 under transpose": (vt[1], vt[2]) == (v[2], v[1]),
            "T4<->T6 under negation": (vn[3], vn[5]) == (v[5], v[3]),
            "T1 T2 T3 T5 under negation": (vn[0], vn[1], vn[2], vn[4]) == (v[0], v[1], v[2], v[4]),
        }
        for name, ok in checks.items():
            if not ok:
                res.fail(f"{m.entries}: {name}")
    return res
