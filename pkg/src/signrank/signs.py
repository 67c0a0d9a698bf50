"""Signs, generalized sign patterns, and the ``.sp`` text format."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

PLUS = "+"
MINUS = "-"
ZERO = "0"
FREE = "#"

SIGNS = (PLUS, MINUS, ZERO)
GEN_SIGNS = (PLUS, MINUS, ZERO, FREE)

DEFAULT_REFINEMENT_CAP = 8

_SUB_TABLE = {
    (PLUS, ZERO): PLUS,
    (ZERO, MINUS): PLUS,
    (PLUS, MINUS): PLUS,
    (MINUS, PLUS): MINUS,
    (ZERO, PLUS): MINUS,
    (MINUS, ZERO): MINUS,
    (ZERO, ZERO): ZERO,
    (PLUS, PLUS): FREE,
    (MINUS, MINUS): FREE,
}

_NEG = {PLUS: MINUS, MINUS: PLUS, ZERO: ZERO, FREE: FREE}


class PatternError(ValueError):
    """Malformed pattern or incompatible pattern shapes."""


class PatternParseError(PatternError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class RefinementCapError(PatternError):
    def __init__(self, free_count: int, cap: int):
        super().__init__(f"pattern has {free_count} '#' entries, refinement cap is {cap}")
        self.free_count = free_count
        self.cap = cap


def sign_sub(a: str, b: str) -> str:
    """Difference of two signs; ``#`` when the sign of the difference is undetermined."""
    try:
        return _SUB_TABLE[a, b]
    except KeyError:
        raise PatternError(f"sign_sub is defined on {{+,-,0}} only, got {a!r}, {b!r}") from None


def sign_of(x) -> str:
    if x > 0:
        return PLUS
    if x < 0:
        return MINUS
    return ZERO


def admits(s: str, x) -> bool:
    """True when the real number ``x`` is allowed by the generalized sign ``s``."""
    return s == FREE or sign_of(x) == s


@dataclass(frozen=True)
class GenSignPattern:
    """Immutable rectangular grid over ``{+, -, 0, #}``."""

    entries: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if not self.entries or not self.entries[0]:
            raise PatternError("pattern must have at least one row and one column")
        width = len(self.entries[0])
        for i, row in enumerate(self.entries):
            if len(row) != width:
                raise PatternError(f"row {i} has {len(row)} entries, expected {width}")
            for s in row:
                if s not in GEN_SIGNS:
                    raise PatternError(f"invalid sign {s!r}")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[str] | str]) -> GenSignPattern:
        """Build from nested sequences; a row may also be a string like ``"+ 0 -"``."""
        out = []
        for row in rows:
            if isinstance(row, str):
                row = row.split() if " " in row.strip() else list(row)
            out.append(tuple(_normalize_token(s) for s in row))
        return cls(tuple(out))

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij: tuple[int, int]) -> str:
        i, j = ij
        return self.entries[i][j]

    def cells(self) -> Iterator[tuple[int, int, str]]:
        for i, row in enumerate(self.entries):
            for j, s in enumerate(row):
                yield i, j, s

    @property
    def free_count(self) -> int:
        return sum(row.count(FREE) for row in self.entries)

    @property
    def is_sign_pattern(self) -> bool:
        return self.free_count == 0

    def is_zero(self) -> bool:
        return all(s == ZERO for _, _, s in self.cells())

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> GenSignPattern:
        return GenSignPattern(tuple(tuple(self.entries[i][j] for j in cols) for i in rows))

    def replace(self, i: int, j: int, s: str) -> GenSignPattern:
        grid = [list(r) for r in self.entries]
        grid[i][j] = s
        return GenSignPattern(tuple(tuple(r) for r in grid))

    def negate(self) -> GenSignPattern:
        return GenSignPattern(tuple(tuple(_NEG[s] for s in row) for row in self.entries))

    def transpose(self) -> GenSignPattern:
        return GenSignPattern(tuple(zip(*self.entries)))

    @property
    def T(self) -> GenSignPattern:
        return self.transpose()

    def __neg__(self) -> GenSignPattern:
        return self.negate()

    def __le__(self, other: GenSignPattern) -> bool:
        """Refinement order: every entry equal, or ``#`` in ``other``."""
        if self.shape != other.shape:
            return False
        return all(
            a == c or c == FREE
            for ra, rc in zip(self.entries, other.entries)
            for a, c in zip(ra, rc)
        )

    def to_text(self) -> str:
        return serialize(self)

    def __str__(self) -> str:
        return "\n".join(" ".join(row) for row in self.entries)


def negate(a: GenSignPattern) -> GenSignPattern:
    return a.negate()


def transpose(a: GenSignPattern) -> GenSignPattern:
    return a.transpose()


def hstack(*blocks: GenSignPattern) -> GenSignPattern:
    if len({b.rows for b in blocks}) != 1:
        raise PatternError("hstack needs equal row counts")
    return GenSignPattern(tuple(sum((b.entries[i] for b in blocks), ()) for i in range(blocks[0].rows)))


def vstack(*blocks: GenSignPattern) -> GenSignPattern:
    if len({b.cols for b in blocks}) != 1:
        raise PatternError("vstack needs equal column counts")
    return GenSignPattern(sum((b.entries for b in blocks), ()))


def sgn_of_matrix(b) -> GenSignPattern:
    """Sign pattern of an exact matrix (anything with ``.entries`` or a nested sequence)."""
    grid = getattr(b, "entries", b)
    return GenSignPattern(tuple(tuple(sign_of(x) for x in row) for row in grid))


def is_member(b, a: GenSignPattern) -> bool:
    """Exact membership of a rational matrix in the qualitative class of ``a``."""
    grid = getattr(b, "entries", b)
    if len(grid) != a.rows or any(len(row) != a.cols for row in grid):
        shape = (len(grid), len(grid[0]) if grid else 0)
        raise PatternError(f"incompatible shapes: matrix {shape} vs pattern {a.shape}")
    return all(admits(s, x) for row_a, row_b in zip(a.entries, grid) for s, x in zip(row_a, row_b))


def refinements(c: GenSignPattern, cap: int = DEFAULT_REFINEMENT_CAP) -> list[GenSignPattern]:
    """All sign patterns below ``c`` in the refinement order, ``#`` replaced in + - 0 order."""
    free = [(i, j) for i, j, s in c.cells() if s == FREE]
    if len(free) > cap:
        raise RefinementCapError(len(free), cap)
    if not free:
        return [c]
    out = []
    for choice in itertools.product(SIGNS, repeat=len(free)):
        grid = [list(r) for r in c.entries]
        for (i, j), s in zip(free, choice):
            grid[i][j] = s
        out.append(GenSignPattern(tuple(tuple(r) for r in grid)))
    return out


# --- text format -------------------------------------------------------------

_TOKEN_ALIASES = {"−": MINUS, "–": MINUS}


def _normalize_token(tok: str) -> str:
    return _TOKEN_ALIASES.get(tok, tok)


def _grid_lines(text: str) -> Iterator[tuple[int, list[tuple[int, str]]]]:
    """Yield (line number, [(column, token), ...]) for every non-blank, non-comment line."""
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(";"):
            continue
        tokens = []
        col = 0
        for tok in line.split():
            col = line.index(tok, col)
            tokens.append((col + 1, tok))
            col += len(tok)
        yield lineno, tokens


def parse(text: str) -> GenSignPattern:
    rows: list[tuple[str, ...]] = []
    width = None
    first_line = None
    for lineno, tokens in _grid_lines(text):
        row = []
        for col, tok in tokens:
            tok = _normalize_token(tok)
            if tok not in GEN_SIGNS:
                raise PatternParseError(f"invalid token {tok!r}, expected one of + - 0 #", lineno, col)
            row.append(tok)
        if width is None:
            width, first_line = len(row), lineno
        elif len(row) != width:
            raise PatternParseError(
                f"row has {len(row)} entries but line {first_line} has {width}", lineno, 1)
        rows.append(tuple(row))
    if not rows:
        raise PatternParseError("no pattern rows found", 1, 1)
    return GenSignPattern(tuple(rows))


def serialize(a: GenSignPattern) -> str:
    return "".join(" ".join(row) + "\n" for row in a.entries)


def load(path) -> GenSignPattern:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def parse_rational(tok: str) -> Fraction:
    return Fraction(tok)
