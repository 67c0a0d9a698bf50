"""Command-line interface: ``signrank {mr,decompose,examples,verify}``."""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, TextIO

from .engine import DEFAULT_GRID, MrBounds, SearchConfig
from .examples import run_examples
from .formula import cross_validate, evaluate_with_trace, formula_terms, intersect
from .separation import find_1_separations
from .signs import GenSignPattern, PatternError, load, serialize
from .verify import inequality_suite, lemma_suites

SCHEMA = "signrank/1"

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_OPEN = 2
EXIT_NO_SEPARATION = 3
EXIT_VERIFY_FAILED = 4


@dataclass
class RunReport:
    command: str
    input_digest: str | None
    config: dict
    payload: dict
    wall_time: float = field(default=0.0, compare=False)

    def to_json(self) -> str:
        # wall time is deliberately left out so identical runs give identical bytes
        doc = {"schema": SCHEMA, "command": self.command, "input_digest": self.input_digest,
               "config": self.config, "result": self.payload}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def digest(pattern: GenSignPattern) -> str:
    return "sha256:" + hashlib.sha256(serialize(pattern).encode()).hexdigest()


def parse_grid(text: str) -> tuple[Fraction, ...]:
    try:
        values = tuple(Fraction(tok.strip()) for tok in text.split(",") if tok.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {exc}") from None
    if not values or any(v == 0 for v in values):
        raise argparse.ArgumentTypeError("grid values must be nonzero rationals")
    return values


def parse_shape(text: str) -> tuple[int, int]:
    try:
        r, c = text.lower().split("x")
        return int(r), int(c)
    except ValueError:
        raise argparse.ArgumentTypeError(f"shape must look like 3x3, got {text!r}") from None


def _config(args) -> SearchConfig:
    return SearchConfig(grid=args.grid, restarts=args.restarts, seed=args.seed, max_depth=args.max_depth)


def _bounds_lines(b: MrBounds) -> list[str]:
    cert = b.lb_certificate
    lower = cert.kind
    if cert.rows:
        lower += f" rows {list(cert.rows)} cols {list(cert.cols)}"
    out = [f"  lower bound {b.lb}: {lower}", f"  upper bound {b.ub}: witness"]
    out += ["    " + line for line in str(b.ub_certificate).splitlines()]
    return out


# --- commands ----------------------------------------------------------------

def cmd_mr(args, out: TextIO) -> tuple[RunReport, int]:
    pattern = load(args.file)
    cfg = _config(args)
    bounds, trace = evaluate_with_trace(pattern, cfg)
    if bounds.exact:
        print(f"mr = {bounds.lb} (exact)", file=out)
    else:
        print(f"mr in [{bounds.lb}, {bounds.ub}] (open interval)", file=out)
    for line in _bounds_lines(bounds):
        print(line, file=out)
    payload = {"mr": bounds.to_dict()}
    if args.trace:
        print("trace:", file=out)
        for line in trace.lines(1):
            print(line, file=out)
        payload["trace"] = trace.to_dict()
    report = RunReport("mr", digest(pattern), cfg.to_dict(), payload)
    return report, EXIT_OK if bounds.exact else EXIT_OPEN


def cmd_decompose(args, out: TextIO) -> tuple[RunReport, int]:
    pattern = load(args.file)
    cfg = _config(args)
    seps = find_1_separations(pattern)
    if not seps:
        print("no 1-separation found", file=out)
        report = RunReport("decompose", digest(pattern), cfg.to_dict(), {"separations": []})
        return report, EXIT_NO_SEPARATION
    shown = seps[:1] if args.first else seps
    print(f"{len(seps)} separation(s) found" + (", showing the first" if args.first else ""), file=out)
    reports = [formula_terms(pattern, s, cfg) for s in shown]
    result = reports[0].result
    for fr in reports:
        result = intersect(result, fr.result)
        print(f"terms for {fr.separation}:", file=out)
        for t in fr.terms:
            mark = "  <- achieving" if t.index == fr.achieving_term else ""
            print(f"  {t.label:32s} {t}{mark}", file=out)
        if args.trace:
            print("  trace:", file=out)
            for node in fr.trace:
                for line in node.lines(2):
                    print(line, file=out)
    status = "exact" if result.exact else "open interval"
    print(f"mr = {result} ({status}); direct engine {reports[0].direct}", file=out)
    payload = {"separations": [fr.to_dict(trace=args.trace) for fr in reports], "mr": result.to_dict()}
    report = RunReport("decompose", digest(pattern), cfg.to_dict(), payload)
    return report, EXIT_OK if result.exact else EXIT_OPEN


def cmd_examples(args, out: TextIO) -> tuple[RunReport, int]:
    cfg = _config(args)
    outcomes = run_examples(cfg)
    for o in outcomes:
        fr = o.report
        print(f"Example {o.example.name} ({o.example.description}): mr = {fr.result}", file=out)
        for t in fr.terms:
            mark = "  <- achieving" if t.index == fr.achieving_term else ""
            print(f"  {t.label:32s} {t}{mark}", file=out)
        for diff in o.mismatches:
            print(f"  MISMATCH {diff}", file=out)
    matched = sum(o.ok for o in outcomes)
    print(f"{matched}/{len(outcomes)} matched", file=out)
    payload = {"examples": [o.to_dict() for o in outcomes], "matched": matched, "total": len(outcomes)}
    report = RunReport("examples", None, cfg.to_dict(), payload)
    return report, EXIT_OK if matched == len(outcomes) else EXIT_VERIFY_FAILED


def cmd_verify(args, out: TextIO) -> tuple[RunReport, int]:
    cfg = _config(args)
    shape = args.shape
    if shape is None and not args.lemmas and not args.inequalities:
        shape = (3, 3)
    payload: dict = {}
    violations = 0
    if shape is not None:
        cv = cross_validate(*shape, cfg)
        violations += len(cv.mismatches)
        payload["cross_validation"] = cv.to_dict()
        print(f"shape {shape[0]}x{shape[1]}: {cv.total} patterns, {cv.exact_both} exact both ways, "
              f"{cv.matched} matched, {len(cv.mismatches)} mismatches", file=out)
    if args.lemmas:
        suites = lemma_suites(args.trials, args.seed)
        payload["lemmas"] = [s.to_dict() for s in suites]
        for s in suites:
            violations += len(s.violations)
            print(f"{s.name}: {s.trials} trials, {len(s.violations)} violations", file=out)
    if args.inequalities:
        s = inequality_suite(args.trials, args.seed, cfg)
        violations += len(s.violations)
        payload["inequalities"] = s.to_dict()
        print(f"{s.name}: {s.trials} patterns, {len(s.violations)} violations", file=out)
    payload["violations"] = violations
    print(f"total violations: {violations}", file=out)
    report = RunReport("verify", None, cfg.to_dict() | {"trials": args.trials}, payload)
    return report, EXIT_OK if violations == 0 else EXIT_VERIFY_FAILED


# --- argument parsing --------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="PATH", help="write the structured report to PATH ('-' for stdout)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--restarts", type=int, default=SearchConfig.restarts)
    common.add_argument("--grid", type=parse_grid, default=DEFAULT_GRID,
                        help="comma-separated nonzero rationals, e.g. 1,-1,2,-2,1/2,-1/2")
    common.add_argument("--max-depth", type=int, default=SearchConfig.max_depth)

    parser = argparse.ArgumentParser(prog="signrank", description="Minimum rank of sign pattern matrices.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mr", parents=[common], help="certified mr interval of a pattern file")
    p.add_argument("file")
    p.add_argument("--trace", action="store_true")
    p.set_defaults(func=cmd_mr)

    p = sub.add_parser("decompose", parents=[common], help="1-separations and the six-term table")
    p.add_argument("file")
    p.add_argument("--first", action="store_true", help="only the canonical first separation")
    p.add_argument("--trace", action="store_true")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("examples", parents=[common], help="reproduce the built-in worked examples")
    p.set_defaults(func=cmd_examples)

    p = sub.add_parser("verify", parents=[common], help="exhaustive and randomized consistency checks")
    p.add_argument("--shape", type=parse_shape, help="cross-validate every pattern of shape RxC")
    p.add_argument("--lemmas", action="store_true", help="run the rank identity suites")
    p.add_argument("--inequalities", action="store_true", help="random term-inequality checks")
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, which here would read as "open interval"
        return EXIT_INPUT if exc.code == 2 else exc.code
    to_stdout = args.json == "-"
    out = sys.stderr if to_stdout else sys.stdout
    handler: Callable = args.func
    start = time.perf_counter()
    try:
        report, status = handler(args, out)
    except PatternError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report.wall_time = time.perf_counter() - start
    print(f"({report.wall_time:.2f} s)", file=out)
    if args.json:
        text = report.to_json()
        if to_stdout:
            sys.stdout.write(text)
        else:
            with open(args.json, "w", encoding="utf-8") as fh:
                fh.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
