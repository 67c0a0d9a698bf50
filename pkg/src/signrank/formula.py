"""Six-term minimum rank formula for sign patterns with a 1-separation.

For a separation with blocks A11, A12, A21, a22, A23, A32, A33 the terms are

    T1 = mr(A11) + mr(A33) + 2
    T2 = mr([A11 A12]) + mr([A32 A33]) + 1
    T3 = mr([A11; A21]) + mr([A23; A33]) + 1
    T4, T5, T6 = mr(R_p) + mr(S_p)   for p = +, 0, -

with R_p = [[A11, A12], [A21, p]] and S_p = [[a22 - p, A23], [A32, A33]], and mr(M)
is the minimum of the six. Sub-ranks are evaluated recursively.
"""
from __future__ import annotations

import functools
import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .engine import FORMULA, REFINEMENTS, LowerCertificate, MrBounds, SearchConfig, mr_bounds
from .linalg import ConsistencyError, RationalMatrix, rank, subdirect_sum
from .separation import Blocks, Separation, extract_blocks, find_1_separations
from .signs import (FREE, MINUS, PLUS, SIGNS, ZERO, GenSignPattern, PatternError,
                    hstack, is_member, refinements, sign_sub, vstack)

TERM_LABELS = (
    "mr(A11)+mr(A33)+2",
    "mr([A11 A12])+mr([A32 A33])+1",
    "mr([A11;A21])+mr([A23;A33])+1",
    "mr(R+)+mr(S+)",
    "mr(R0)+mr(S0)",
    "mr(R-)+mr(S-)",
)
RS_SIGNS = (PLUS, ZERO, MINUS)


class InconsistencyError(ConsistencyError):
    """Formula interval and direct interval do not intersect."""


@dataclass(frozen=True)
class RSPair:
    p: str
    r: GenSignPattern
    s: GenSignPattern


def build_rs(blocks: Blocks, p: str) -> RSPair:
    if p not in SIGNS:
        raise PatternError(f"p must be one of + 0 -, got {p!r}")
    r = vstack(hstack(blocks.a11, blocks.a12),
               hstack(blocks.a21, GenSignPattern(((p,),))))
    corner = GenSignPattern(((sign_sub(blocks.a22, p),),))
    s = vstack(hstack(corner, blocks.a23), hstack(blocks.a32, blocks.a33))
    return RSPair(p, r, s)


def term_subpatterns(blocks: Blocks) -> list[tuple[list[GenSignPattern], int]]:
    b = blocks
    out = [
        ([b.a11, b.a33], 2),
        ([hstack(b.a11, b.a12), hstack(b.a32, b.a33)], 1),
        ([vstack(b.a11, b.a21), vstack(b.a23, b.a33)], 1),
    ]
    for p in RS_SIGNS:
        rs = build_rs(b, p)
        out.append(([rs.r, rs.s], 0))
    return out


@dataclass(frozen=True)
class TraceNode:
    pattern: GenSignPattern
    bounds: MrBounds
    source: str
    separation: Separation | None = None
    children: tuple[TraceNode, ...] = ()

    def to_dict(self) -> dict:
        d = {"pattern": [" ".join(r) for r in self.pattern.entries],
             "lb": self.bounds.lb, "ub": self.bounds.ub, "source": self.source}
        if self.separation is not None:
            d["separation"] = self.separation.to_dict()
        if self.children:
            d["children"] = [c.to_dict() for c in self.children]
        return d

    def lines(self, indent: int = 0) -> list[str]:
        pat = " / ".join(" ".join(r) for r in self.pattern.entries)
        out = [f"{'  ' * indent}[{pat}] mr {self.bounds} ({self.source})"]
        for c in self.children:
            out.extend(c.lines(indent + 1))
        return out


@dataclass(frozen=True)
class Term:
    index: int
    parts: tuple[MrBounds, ...]
    offset: int
    witness: RationalMatrix = field(compare=False)

    @property
    def lb(self) -> int:
        return sum(p.lb for p in self.parts) + self.offset

    @property
    def ub(self) -> int:
        return sum(p.ub for p in self.parts) + self.offset

    @property
    def exact(self) -> bool:
        return self.lb == self.ub

    @property
    def label(self) -> str:
        return TERM_LABELS[self.index - 1]

    def __str__(self) -> str:
        vals = " + ".join(str(p) for p in self.parts)
        if self.offset:
            vals += f" + {self.offset}"
        total = self.lb if self.exact else f"[{self.lb}, {self.ub}]"
        return f"T{self.index} = {vals} = {total}"

    def to_dict(self) -> dict:
        return {"index": self.index, "label": self.label, "lb": self.lb, "ub": self.ub,
                "exact": self.exact, "parts": [[p.lb, p.ub] for p in self.parts],
                "offset": self.offset}


@dataclass(frozen=True)
class FormulaReport:
    pattern: GenSignPattern
    separation: Separation
    terms: tuple[Term, ...]
    direct: MrBounds
    formula_bounds: MrBounds
    result: MrBounds
    achieving_term: int
    trace: tuple[TraceNode, ...]

    @property
    def values(self) -> tuple[int | tuple[int, int], ...]:
        return tuple(t.lb if t.exact else (t.lb, t.ub) for t in self.terms)

    def to_dict(self, trace: bool = False) -> dict:
        d = {
            "pattern": [" ".join(r) for r in self.pattern.entries],
            "separation": self.separation.to_dict(),
            "terms": [t.to_dict() for t in self.terms],
            "direct": self.direct.to_dict(witness=False),
            "formula": self.formula_bounds.to_dict(witness=False),
            "result": self.result.to_dict(),
            "achieving_term": self.achieving_term,
        }
        if trace:
            d["trace"] = [n.to_dict() for n in self.trace]
        return d


def intersect(a: MrBounds, b: MrBounds) -> MrBounds:
    lb_src = a if a.lb >= b.lb else b
    ub_src = a if a.ub <= b.ub else b
    if lb_src.lb > ub_src.ub:
        raise InconsistencyError(f"intervals [{a.lb}, {a.ub}] and [{b.lb}, {b.ub}] do not meet")
    return MrBounds(lb_src.lb, ub_src.ub, lb_src.lb_certificate, ub_src.ub_certificate)


# --- witnesses ---------------------------------------------------------------

_UNIT = {PLUS: Fraction(1), MINUS: Fraction(-1), ZERO: Fraction(0), FREE: Fraction(0)}


def _corner_scale(c: Fraction, d: Fraction, target: str) -> Fraction:
    """Positive t with sign(c + t d) == target."""
    if target == ZERO:
        if c == 0 and d == 0:
            return Fraction(1)
        if c * d < 0:
            return -c / d
    else:
        sigma = 1 if target == PLUS else -1
        c, d = sigma * c, sigma * d
        if d > 0:
            return Fraction(1) if c + d > 0 else -2 * c / d
        if c > 0:
            return Fraction(1) if d == 0 else c / (-2 * d)
    raise ConsistencyError(f"no positive scale puts {c} + t*{d} in class {target}")


def _term_witness(index: int, pm: GenSignPattern, dims, certs: Sequence[RationalMatrix]) -> RationalMatrix:
    """Member of Q(pm) (pm in block order) of rank at most the term's upper bound."""
    m1, n1, m2, n2 = dims
    r, c = m1, n1
    if index >= 4:
        cm, dm = certs
        t = _corner_scale(cm[m1, n1], dm[0, 0], pm[r, c])
        return subdirect_sum(cm, dm.scale(t), 1)
    w = [[_UNIT[s] for s in row] for row in pm.entries]

    def put(cert, rows, cols):
        for a, i in enumerate(rows):
            for b, j in enumerate(cols):
                w[i][j] = cert[a, b]

    rows1, rows2 = range(m1), range(m1 + 1, m1 + 1 + m2)
    cols1, cols2 = range(n1), range(n1 + 1, n1 + 1 + n2)
    if index == 1:
        put(certs[0], rows1, cols1)
        put(certs[1], rows2, cols2)
    elif index == 2:
        put(certs[0], rows1, [*cols1, c])
        put(certs[1], rows2, [c, *cols2])
    else:
        put(certs[0], [*rows1, r], cols1)
        put(certs[1], [r, *rows2], cols2)
    return RationalMatrix.of(w, cols=pm.cols)


def _unpermute(w: RationalMatrix, s: Separation) -> RationalMatrix:
    out = [[Fraction(0)] * w.cols for _ in range(w.rows)]
    for a, i in enumerate(s.row_order):
        for b, j in enumerate(s.col_order):
            out[i][j] = w[a, b]
    return RationalMatrix.of(out, cols=w.cols)


# --- evaluation --------------------------------------------------------------

def formula_terms(m: GenSignPattern, s: Separation, cfg: SearchConfig | None = None,
                  depth: int = 0) -> FormulaReport:
    """Evaluate all six terms for separation ``s`` of the sign pattern ``m``."""
    cfg = cfg or SearchConfig()
    if m.free_count:
        raise PatternError("the formula applies to sign patterns without '#'")
    blocks = extract_blocks(m, s)
    pm = m.submatrix(s.row_order, s.col_order)
    terms, nodes = [], []
    for index, (subs, offset) in enumerate(term_subpatterns(blocks), start=1):
        evaluated = [_evaluate(sub, cfg, depth + 1) for sub in subs]
        parts = tuple(b for b, _ in evaluated)
        nodes.extend(n for _, n in evaluated)
        w = _unpermute(_term_witness(index, pm, s.dims, [p.ub_certificate for p in parts]), s)
        if not is_member(w, m):
            raise ConsistencyError(f"T{index} witness is not in the class of the pattern")
        terms.append(Term(index, parts, offset, w))

    best_ub = min(t.ub for t in terms)
    achieving = next(t.index for t in terms if t.ub == best_ub)
    witness_ranks = [(rank(t.witness), t.index) for t in terms]
    wrank, windex = min(witness_ranks)
    # Valid because mr(M) is the minimum of the six terms and each term lb is a lower bound.
    formula_bounds = MrBounds(min(t.lb for t in terms), wrank,
                              LowerCertificate(FORMULA), terms[windex - 1].witness)
    direct = mr_bounds(m, cfg)
    result = intersect(direct, formula_bounds)
    return FormulaReport(m, s, tuple(terms), direct, formula_bounds, result, achieving, tuple(nodes))


def evaluate_mr(a: GenSignPattern, cfg: SearchConfig | None = None, depth: int = 0) -> MrBounds:
    """mr interval using the direct engine, tightened recursively by the formula."""
    return _evaluate(a, cfg or SearchConfig(), depth)[0]


def evaluate_with_trace(a: GenSignPattern, cfg: SearchConfig | None = None) -> tuple[MrBounds, TraceNode]:
    return _evaluate(a, cfg or SearchConfig(), 0)


@functools.lru_cache(maxsize=1 << 16)
def _evaluate(a: GenSignPattern, cfg: SearchConfig, depth: int) -> tuple[MrBounds, TraceNode]:
    if a.free_count:
        evaluated = [_evaluate(ref, cfg, depth) for ref in refinements(a, cfg.refinement_cap)]
        lb = min(b.lb for b, _ in evaluated)
        best = min((b for b, _ in evaluated), key=lambda b: b.ub)
        bounds = MrBounds(lb, best.ub, LowerCertificate(REFINEMENTS), best.ub_certificate)
        return bounds, TraceNode(a, bounds, "refinements", None, tuple(n for _, n in evaluated))
    direct = mr_bounds(a, cfg)
    if direct.exact or depth >= cfg.max_depth:
        return direct, TraceNode(a, direct, "engine")
    seps = find_1_separations(a)
    if not seps:
        return direct, TraceNode(a, direct, "engine")
    bounds, children, used = direct, [], None
    for sep in seps if cfg.try_all_separations else seps[:1]:
        report = formula_terms(a, sep, cfg, depth)
        bounds = intersect(bounds, report.formula_bounds)
        children.extend(report.trace)
        used = used or sep
    return bounds, TraceNode(a, bounds, "formula", used, tuple(children))


def check_inequalities(m: GenSignPattern, s: Separation, cfg: SearchConfig | None = None
                       ) -> tuple[bool | None, ...]:
    """T_i >= mr(M) for each term; None where a term or mr(M) is not exact."""
    cfg = cfg or SearchConfig()
    report = formula_terms(m, s, cfg)
    mr = report.direct
    return tuple(t.lb >= mr.lb if (t.exact and mr.exact) else None for t in report.terms)


# --- exhaustive cross-validation ---------------------------------------------

@dataclass
class CrossValidation:
    shape: tuple[int, int]
    total: int = 0
    exact_both: int = 0
    matched: int = 0
    direct_exact: int = 0
    formula_exact: int = 0
    mismatches: list[dict] = field(default_factory=list)

    @property
    def skipped_inexact(self) -> int:
        return self.total - self.exact_both

    @property
    def ok(self) -> bool:
        return self.matched == self.exact_both

    def to_dict(self) -> dict:
        return {"shape": f"{self.shape[0]}x{self.shape[1]}", "total": self.total,
                "exact_both": self.exact_both, "matched": self.matched,
                "direct_exact": self.direct_exact, "formula_exact": self.formula_exact,
                "skipped_inexact": self.skipped_inexact, "mismatches": self.mismatches}


def planted_separation(m1: int, n1: int, m2: int, n2: int) -> Separation:
    return Separation(m1, n1, tuple(range(m1)), tuple(range(n1)),
                      tuple(range(m1 + 1, m1 + 1 + m2)), tuple(range(n1 + 1, n1 + 1 + n2)))


def separated_cells(s: Separation) -> list[tuple[int, int]]:
    """Cells of the block form that are not forced to zero."""
    zero = set(itertools.product(s.rows1, s.cols2)) | set(itertools.product(s.rows2, s.cols1))
    rows = len(s.row_order)
    cols = len(s.col_order)
    return [(i, j) for i in range(rows) for j in range(cols) if (i, j) not in zero]


def patterns_for_shape(rows: int, cols: int):
    """Every sign pattern with the 1-separation of a 1x1 leading block in a rows x cols grid."""
    s = planted_separation(1, 1, rows - 2, cols - 2)
    cells = separated_cells(s)
    for choice in itertools.product(SIGNS, repeat=len(cells)):
        grid = [[ZERO] * cols for _ in range(rows)]
        for (i, j), sign in zip(cells, choice):
            grid[i][j] = sign
        yield GenSignPattern(tuple(tuple(r) for r in grid)), s


def cross_validate(rows: int, cols: int, cfg: SearchConfig | None = None) -> CrossValidation:
    """Compare formula and direct engine on every pattern of the given shape."""
    cfg = cfg or SearchConfig()
    report = CrossValidation((rows, cols))
    if rows < 3 or cols < 3:
        return report
    for m, s in patterns_for_shape(rows, cols):
        fr = formula_terms(m, s, cfg)
        direct, formula = fr.direct, fr.formula_bounds
        report.total += 1
        report.direct_exact += direct.exact
        report.formula_exact += formula.exact
        if direct.exact and formula.exact:
            report.exact_both += 1
            if direct.lb == formula.lb:
                report.matched += 1
            else:
                report.mismatches.append({"pattern": [" ".join(r) for r in m.entries],
                                          "direct": direct.lb, "formula": formula.lb})
    return report


def random_separated_pattern(rng: random.Random, m1: int, n1: int, m2: int, n2: int
                             ) -> tuple[GenSignPattern, Separation]:
    s = planted_separation(m1, n1, m2, n2)
    rows, cols = m1 + m2 + 1, n1 + n2 + 1
    grid = [[ZERO] * cols for _ in range(rows)]
    for i, j in separated_cells(s):
        grid[i][j] = rng.choice(SIGNS)
    return GenSignPattern(tuple(tuple(r) for r in grid)), s


def shuffle_pattern(rng: random.Random, m: GenSignPattern, s: Separation
                    ) -> tuple[GenSignPattern, Separation]:
    """Randomly permute rows and columns, carrying the separation along."""
    rp = list(range(m.rows))
    cp = list(range(m.cols))
    rng.shuffle(rp)
    rng.shuffle(cp)
    # new row k is old row rp[k]
    rinv = {old: new for new, old in enumerate(rp)}
    cinv = {old: new for new, old in enumerate(cp)}
    shuffled = m.submatrix(rp, cp)
    moved = Separation(rinv[s.cut_row], cinv[s.cut_col],
                       tuple(sorted(rinv[i] for i in s.rows1)), tuple(sorted(cinv[j] for j in s.cols1)),
                       tuple(sorted(rinv[i] for i in s.rows2)), tuple(sorted(cinv[j] for j in s.cols2)))
    return shuffled, moved
