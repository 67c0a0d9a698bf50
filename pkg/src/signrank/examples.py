"""Worked examples showing that each of the six terms is needed.

Separations are given explicitly in block form; each is also among those found
by :func:`find_1_separations`.
"""
from __future__ import annotations

from dataclasses import dataclass

from .engine import SearchConfig
from .formula import FormulaReport, formula_terms
from .separation import Separation
from .signs import GenSignPattern


@dataclass(frozen=True)
class Expectation:
    mr: int
    terms: tuple[int, ...]
    achieving: int


@dataclass(frozen=True)
class WorkedExample:
    name: str
    description: str
    pattern: GenSignPattern
    separation: Separation
    expected: Expectation


def _sep3x3() -> Separation:
    return Separation(1, 1, (0,), (0,), (2,), (2,))


_A = GenSignPattern.from_rows(["0 + 0", "+ 0 +", "0 + 0"])
_B = GenSignPattern.from_rows(["+ + 0 0 0", "+ + 0 0 0", "0 + + + 0", "0 0 + 0 +"])
_B_SEP = Separation(2, 2, (0, 1), (0, 1), (3,), (3, 4))
_C = GenSignPattern.from_rows(["+ + 0", "+ - -", "0 + +"])
_D = GenSignPattern.from_rows(["+ 0 0", "+ - +", "0 + -"])

EXAMPLES: tuple[WorkedExample, ...] = (
    WorkedExample("A", "T1 needed", _A, _sep3x3(), Expectation(2, (2, 3, 3, 4, 4, 4), 1)),
    WorkedExample("B", "T2 needed", _B, _B_SEP, Expectation(3, (4, 3, 5, 4, 4, 4), 2)),
    # transposition swaps T2 and T3 and keeps the rest
    WorkedExample("B^T", "T3 needed", _B.transpose(), _B_SEP.transposed(),
                 Expectation(3, (4, 5, 3, 4, 4, 4), 3)),
    WorkedExample("C", "T4 needed", _C, _sep3x3(), Expectation(2, (4, 3, 3, 2, 3, 3), 4)),
    # negation swaps T4 and T6 and keeps the rest
    WorkedExample("-C", "T6 needed", _C.negate(), _sep3x3(), Expectation(2, (4, 3, 3, 3, 3, 2), 6)),
    WorkedExample("D", "T5 needed", _D, _sep3x3(), Expectation(2, (4, 3, 3, 3, 2, 3), 5)),
)


def get_example(name: str) -> WorkedExample:
    for ex in EXAMPLES:
        if ex.name == name:
            return ex
    raise KeyError(name)


@dataclass(frozen=True)
class ExampleOutcome:
    example: WorkedExample
    report: FormulaReport
    mismatches: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> dict:
        e = self.example.expected
        return {"name": self.example.name, "description": self.example.description,
                "expected": {"mr": e.mr, "terms": list(e.terms), "achieving_term": e.achieving},
                "computed": self.report.to_dict(), "matched": self.ok,
                "mismatches": list(self.mismatches)}


def check_example(ex: WorkedExample, cfg: SearchConfig | None = None,
                  expected: Expectation | None = None) -> ExampleOutcome:
    expected = expected or ex.expected
    report = formula_terms(ex.pattern, ex.separation, cfg or SearchConfig())
    diffs = []
    if not report.result.exact or report.result.lb != expected.mr:
        diffs.append(f"mr: expected {expected.mr}, computed {report.result}")
    for t, want in zip(report.terms, expected.terms):
        if not t.exact or t.lb != want:
            got = t.lb if t.exact else f"[{t.lb}, {t.ub}]"
            diffs.append(f"T{t.index}: expected {want}, computed {got}")
    if report.achieving_term != expected.achieving:
        diffs.append(f"achieving term: expected T{expected.achieving}, computed T{report.achieving_term}")
    return ExampleOutcome(ex, report, tuple(diffs))


def run_examples(cfg: SearchConfig | None = None,
                 expectations: dict[str, Expectation] | None = None) -> list[ExampleOutcome]:
    """Check every built-in example; ``expectations`` overrides the stored values by name."""
    expectations = expectations or {}
    return [check_example(ex, cfg, expectations.get(ex.name)) for ex in EXAMPLES]
