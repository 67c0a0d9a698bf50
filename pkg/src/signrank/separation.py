"""Detection of 1-separations and extraction of the seven blocks."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .signs import ZERO, GenSignPattern, PatternError

log = logging.getLogger(__name__)

MAX_PARTITIONS = 1 << 20


class SeparationError(PatternError):
    pass


@dataclass(frozen=True)
class Separation:
    """Cut row/column plus the two row blocks and two column blocks (0-based indices)."""

    cut_row: int
    cut_col: int
    rows1: tuple[int, ...]
    cols1: tuple[int, ...]
    rows2: tuple[int, ...]
    cols2: tuple[int, ...]
    truncated: bool = field(default=False, compare=False)

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return len(self.rows1), len(self.cols1), len(self.rows2), len(self.cols2)

    @property
    def row_order(self) -> tuple[int, ...]:
        return self.rows1 + (self.cut_row,) + self.rows2

    @property
    def col_order(self) -> tuple[int, ...]:
        return self.cols1 + (self.cut_col,) + self.cols2

    def swapped(self) -> Separation:
        return Separation(self.cut_row, self.cut_col, self.rows2, self.cols2, self.rows1, self.cols1)

    def transposed(self) -> Separation:
        return Separation(self.cut_col, self.cut_row, self.cols1, self.rows1, self.cols2, self.rows2)

    def canonical(self) -> Separation:
        """Representative whose first row block holds the smallest non-cut row."""
        return self if min(self.rows1) < min(self.rows2) else self.swapped()

    def validate(self, m: GenSignPattern) -> None:
        rows = sorted(self.rows1 + self.rows2 + (self.cut_row,))
        cols = sorted(self.cols1 + self.cols2 + (self.cut_col,))
        if rows != list(range(m.rows)) or cols != list(range(m.cols)):
            raise SeparationError("separation index sets do not partition the pattern")
        if min(self.dims) < 1:
            raise SeparationError("all four blocks must be nonempty")
        for i, j in itertools.chain(itertools.product(self.rows1, self.cols2),
                                    itertools.product(self.rows2, self.cols1)):
            if m[i, j] != ZERO:
                raise SeparationError(f"entry ({i}, {j}) must be 0 for this separation")

    def is_valid(self, m: GenSignPattern) -> bool:
        try:
            self.validate(m)
        except SeparationError:
            return False
        return True

    def to_dict(self) -> dict:
        return {"cut_row": self.cut_row, "cut_col": self.cut_col,
                "rows1": list(self.rows1), "cols1": list(self.cols1),
                "rows2": list(self.rows2), "cols2": list(self.cols2)}

    def __str__(self) -> str:
        return (f"cut ({self.cut_row}, {self.cut_col}); rows {list(self.rows1)} | {list(self.rows2)}; "
                f"cols {list(self.cols1)} | {list(self.cols2)}")


@dataclass(frozen=True)
class Blocks:
    a11: GenSignPattern
    a12: GenSignPattern
    a21: GenSignPattern
    a22: str
    a23: GenSignPattern
    a32: GenSignPattern
    a33: GenSignPattern


def _components(m: GenSignPattern, rows: list[int], cols: list[int]) -> list[tuple[list[int], list[int]]]:
    """Connected components of the bipartite graph of nonzero (+, -, #) entries."""
    nr = len(rows)
    src, dst = [], []
    for a, i in enumerate(rows):
        for b, j in enumerate(cols):
            if m[i, j] != ZERO:
                src.append(a)
                dst.append(nr + b)
    size = nr + len(cols)
    graph = coo_matrix(([1] * len(src), (src, dst)), shape=(size, size))
    count, labels = connected_components(graph, directed=False)
    comps = [([], []) for _ in range(count)]
    for a, lab in enumerate(labels):
        if a < nr:
            comps[lab][0].append(rows[a])
        else:
            comps[lab][1].append(cols[a - nr])
    # order by smallest member so enumeration is deterministic
    comps.sort(key=lambda c: (min(c[0]) if c[0] else float("inf"), min(c[1]) if c[1] else float("inf")))
    return comps


def find_1_separations(m: GenSignPattern, max_partitions: int = MAX_PARTITIONS) -> list[Separation]:
    """All 1-separations of ``m`` (canonical representatives), sorted by
    (cut_row, cut_col, rows1, cols1)."""
    if m.rows < 3 or m.cols < 3:
        return []
    found: dict[tuple, Separation] = {}
    for r, c in itertools.product(range(m.rows), range(m.cols)):
        rows = [i for i in range(m.rows) if i != r]
        cols = [j for j in range(m.cols) if j != c]
        comps = _components(m, rows, cols)
        # the component holding the smallest non-cut row is pinned to side 1
        anchor = next(k for k, comp in enumerate(comps) if rows[0] in comp[0])
        others = [k for k in range(len(comps)) if k != anchor]
        truncated = 2 ** len(others) > max_partitions
        if truncated:
            log.warning("cut (%d, %d): %d components, emitting single-component splits only",
                        r, c, len(comps))
            # one component alone on a side: the anchor, or any other component
            subsets = [()] + [tuple(k for k in others if k != alone) for alone in others]
        else:
            subsets = itertools.chain.from_iterable(
                itertools.combinations(others, size) for size in range(len(others) + 1))
        for extra in subsets:
            side1 = {anchor, *extra}
            r1 = sorted(i for k in side1 for i in comps[k][0])
            c1 = sorted(j for k in side1 for j in comps[k][1])
            r2 = sorted(i for k in range(len(comps)) if k not in side1 for i in comps[k][0])
            c2 = sorted(j for k in range(len(comps)) if k not in side1 for j in comps[k][1])
            if not (r1 and c1 and r2 and c2):
                continue
            sep = Separation(r, c, tuple(r1), tuple(c1), tuple(r2), tuple(c2), truncated)
            found.setdefault((r, c, sep.rows1, sep.cols1), sep)
    return [found[k] for k in sorted(found)]


def first_separation(m: GenSignPattern) -> Separation | None:
    seps = find_1_separations(m)
    return seps[0] if seps else None


def extract_blocks(m: GenSignPattern, s: Separation) -> Blocks:
    s.validate(m)
    r, c = [s.cut_row], [s.cut_col]
    return Blocks(
        a11=m.submatrix(s.rows1, s.cols1),
        a12=m.submatrix(s.rows1, c),
        a21=m.submatrix(r, s.cols1),
        a22=m[s.cut_row, s.cut_col],
        a23=m.submatrix(r, s.cols2),
        a32=m.submatrix(s.rows2, c),
        a33=m.submatrix(s.rows2, s.cols2),
    )


def assemble(b: Blocks) -> GenSignPattern:
    """Block form [[A11, A12, 0], [A21, a22, A23], [0, A32, A33]]."""
    m1, n1 = b.a11.shape
    m2, n2 = b.a33.shape
    rows = []
    for i in range(m1):
        rows.append(b.a11.entries[i] + b.a12.entries[i] + (ZERO,) * n2)
    rows.append(b.a21.entries[0] + (b.a22,) + b.a23.entries[0])
    for i in range(m2):
        rows.append((ZERO,) * n1 + b.a32.entries[i] + b.a33.entries[i])
    return GenSignPattern(tuple(rows))


def permuted(m: GenSignPattern, s: Separation) -> GenSignPattern:
    """``m`` with rows and columns reordered into the block form of ``s``."""
    return m.submatrix(s.row_order, s.col_order)
