"""Exact integer matrix algebra: Smith/Hermite normal forms and linear solving.

All arithmetic uses Python's arbitrary-precision integers.  Fixed-width types
are never used: normal-form pivoting can blow up intermediate entries far past
64 bits even for small inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable, List, Optional, Sequence, Tuple, Union


class IntMatrix:
    """An immutable integer matrix stored as a tuple of row tuples."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: Iterable[Iterable[int]]):
        if rows < 0 or cols < 0:
            raise ValueError(f"negative matrix shape {rows}x{cols}")
        tup = tuple(tuple(int(x) for x in row) for row in data)
        if len(tup) != rows or any(len(r) != cols for r in tup):
            raise ValueError(f"data does not match shape {rows}x{cols}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "data", tup)

    def __setattr__(self, name, value):
        raise AttributeError("IntMatrix is immutable")

    # -- constructors -----------------------------------------------------

    @staticmethod
    def from_rows(rows: Sequence[Sequence[int]]) -> "IntMatrix":
        r = len(rows)
        c = len(rows[0]) if r else 0
        return IntMatrix(r, c, rows)

    @staticmethod
    def zeros(rows: int, cols: int) -> "IntMatrix":
        return IntMatrix(rows, cols, [[0] * cols for _ in range(rows)])

    @staticmethod
    def identity(n: int) -> "IntMatrix":
        return IntMatrix(n, n, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @staticmethod
    def diagonal(entries: Sequence[int], rows: Optional[int] = None, cols: Optional[int] = None) -> "IntMatrix":
        n = len(entries)
        r = rows if rows is not None else n
        c = cols if cols is not None else n
        m = [[0] * c for _ in range(r)]
        for i, d in enumerate(entries):
            if i < r and i < c:
                m[i][i] = d
        return IntMatrix(r, c, m)

    @staticmethod
    def column(entries: Sequence[int]) -> "IntMatrix":
        return IntMatrix(len(entries), 1, [[int(x)] for x in entries])

    # -- basic accessors ---------------------------------------------------

    def __getitem__(self, ij: Tuple[int, int]) -> int:
        i, j = ij
        return self.data[i][j]

    def row(self, i: int) -> Tuple[int, ...]:
        return self.data[i]

    def col(self, j: int) -> Tuple[int, ...]:
        return tuple(r[j] for r in self.data)

    def column_vectors(self) -> List[Tuple[int, ...]]:
        return [self.col(j) for j in range(self.cols)]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IntMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.data))

    def __repr__(self) -> str:
        return f"IntMatrix({self.rows}x{self.cols}, {list(map(list, self.data))})"

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.data for x in row)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        self._require_same_shape(other)
        return IntMatrix(
            self.rows, self.cols,
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.data, other.data)],
        )

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        self._require_same_shape(other)
        return IntMatrix(
            self.rows, self.cols,
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.data, other.data)],
        )

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, [[-x for x in row] for row in self.data])

    def scale(self, k: int) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, [[k * x for x in row] for row in self.data])

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        ocols = [other.col(j) for j in range(other.cols)]
        return IntMatrix(
            self.rows, other.cols,
            [[sum(a * b for a, b in zip(row, colv)) for colv in ocols] for row in self.data],
        )

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, [self.col(j) for j in range(self.cols)])

    def apply(self, vec: Sequence[int]) -> Tuple[int, ...]:
        if len(vec) != self.cols:
            raise ValueError("vector length does not match column count")
        return tuple(sum(a * b for a, b in zip(row, vec)) for row in self.data)

    # -- slicing / stacking --------------------------------------------------

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "IntMatrix":
        return IntMatrix(
            len(row_idx), len(col_idx),
            [[self.data[i][j] for j in col_idx] for i in row_idx],
        )

    def hstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.rows != other.rows:
            raise ValueError("row counts differ in hstack")
        return IntMatrix(
            self.rows, self.cols + other.cols,
            [ra + rb for ra, rb in zip(self.data, other.data)],
        )

    def vstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.cols:
            raise ValueError("column counts differ in vstack")
        return IntMatrix(self.rows + other.rows, self.cols, self.data + other.data)

    @staticmethod
    def block_diagonal(blocks: Sequence["IntMatrix"]) -> "IntMatrix":
        rows = sum(b.rows for b in blocks)
        cols = sum(b.cols for b in blocks)
        m = [[0] * cols for _ in range(rows)]
        ro = co = 0
        for b in blocks:
            for i in range(b.rows):
                for j in range(b.cols):
                    m[ro + i][co + j] = b.data[i][j]
            ro += b.rows
            co += b.cols
        return IntMatrix(rows, cols, m)

    @staticmethod
    def block(grid: Sequence[Sequence["IntMatrix"]]) -> "IntMatrix":
        """Assemble a matrix from a 2D grid of blocks with consistent shapes."""
        if not grid:
            return IntMatrix.zeros(0, 0)
        row_heights = [row[0].rows for row in grid]
        col_widths = [b.cols for b in grid[0]]
        for row in grid:
            for j, b in enumerate(row):
                if b.cols != col_widths[j]:
                    raise ValueError("inconsistent block widths")
            if any(b.rows != row[0].rows for b in row):
                raise ValueError("inconsistent block heights")
        total = [[0] * sum(col_widths) for _ in range(sum(row_heights))]
        ro = 0
        for bi, row in enumerate(grid):
            co = 0
            for bj, b in enumerate(row):
                for i in range(b.rows):
                    for j in range(b.cols):
                        total[ro + i][co + j] = b.data[i][j]
                co += col_widths[bj]
            ro += row_heights[bi]
        return IntMatrix(sum(row_heights), sum(col_widths), total)

    def determinant(self) -> int:
        """Exact determinant by fraction-free (Bareiss) elimination."""
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        a = [list(row) for row in self.data]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if a[k][k] == 0:
                for i in range(k + 1, n):
                    if a[i][k] != 0:
                        a[k], a[i] = a[i], a[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
                a[i][k] = 0
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def _require_same_shape(self, other: "IntMatrix") -> None:
        if self.rows != other.rows or self.cols != other.cols:
            raise ValueError(
                f"shape mismatch: {self.rows}x{self.cols} vs {other.rows}x{other.cols}"
            )

    def to_lists(self) -> List[List[int]]:
        return [list(row) for row in self.data]


@dataclass(frozen=True)
class SmithDecomposition:
    """U @ source @ V == S, with U, V unimodular and S in Smith normal form."""

    U: IntMatrix
    S: IntMatrix
    V: IntMatrix
    source: IntMatrix

    def diagonal(self) -> List[int]:
        n = min(self.S.rows, self.S.cols)
        return [self.S.data[i][i] for i in range(n)]

    def invariant_factors(self) -> List[int]:
        return [d for d in self.diagonal() if d != 0]

    def rank(self) -> int:
        return len(self.invariant_factors())


class _Worker:
    """Mutable elimination state for normal-form computations."""

    def __init__(self, m: IntMatrix, track_left: bool = True, track_right: bool = True):
        self.a = [list(row) for row in m.data]
        self.rows = m.rows
        self.cols = m.cols
        self.u = [[1 if i == j else 0 for j in range(m.rows)] for i in range(m.rows)] if track_left else None
        self.v = [[1 if i == j else 0 for j in range(m.cols)] for i in range(m.cols)] if track_right else None

    def swap_rows(self, i: int, j: int) -> None:
        if i == j:
            return
        self.a[i], self.a[j] = self.a[j], self.a[i]
        if self.u is not None:
            self.u[i], self.u[j] = self.u[j], self.u[i]

    def swap_cols(self, i: int, j: int) -> None:
        if i == j:
            return
        for row in self.a:
            row[i], row[j] = row[j], row[i]
        if self.v is not None:
            for row in self.v:
                row[i], row[j] = row[j], row[i]

    def addmul_row(self, dst: int, src: int, k: int) -> None:
        if k == 0:
            return
        adst, asrc = self.a[dst], self.a[src]
        for j in range(self.cols):
            adst[j] += k * asrc[j]
        if self.u is not None:
            udst, usrc = self.u[dst], self.u[src]
            for j in range(self.rows):
                udst[j] += k * usrc[j]

    def addmul_col(self, dst: int, src: int, k: int) -> None:
        if k == 0:
            return
        for row in self.a:
            row[dst] += k * row[src]
        if self.v is not None:
            for row in self.v:
                row[dst] += k * row[src]

    def negate_row(self, i: int) -> None:
        self.a[i] = [-x for x in self.a[i]]
        if self.u is not None:
            self.u[i] = [-x for x in self.u[i]]

    def negate_col(self, j: int) -> None:
        for row in self.a:
            row[j] = -row[j]
        if self.v is not None:
            for row in self.v:
                row[j] = -row[j]


def smith_normal_form(m: IntMatrix) -> SmithDecomposition:
    """Compute the Smith normal form with unimodular transforms.

    The invariant factors come out non-negative and each divides the next;
    zero diagonal entries trail.
    """
    w = _Worker(m)
    n = min(w.rows, w.cols)
    t = 0
    while t < n:
        piv = _min_pivot(w.a, t, w.rows, w.cols)
        if piv is None:
            break
        while True:
            i0, j0 = _min_pivot(w.a, t, w.rows, w.cols)  # type: ignore[misc]
            w.swap_rows(t, i0)
            w.swap_cols(t, j0)
            p = w.a[t][t]
            dirty = False
            for i in range(t + 1, w.rows):
                q = w.a[i][t] // p
                w.addmul_row(i, t, -q)
                if w.a[i][t] != 0:
                    dirty = True
            for j in range(t + 1, w.cols):
                q = w.a[t][j] // p
                w.addmul_col(j, t, -q)
                if w.a[t][j] != 0:
                    dirty = True
            if dirty:
                continue
            # pivot now divides everything in its row and column, which are
            # cleared; enforce divisibility on the remaining submatrix
            culprit = None
            for i in range(t + 1, w.rows):
                for j in range(t + 1, w.cols):
                    if w.a[i][j] % p != 0:
                        culprit = i
                        break
                if culprit is not None:
                    break
            if culprit is None:
                break
            w.addmul_row(t, culprit, 1)
        if w.a[t][t] < 0:
            w.negate_row(t)
        t += 1
    U = IntMatrix(m.rows, m.rows, w.u)  # type: ignore[arg-type]
    V = IntMatrix(m.cols, m.cols, w.v)  # type: ignore[arg-type]
    S = IntMatrix(m.rows, m.cols, w.a)
    return SmithDecomposition(U=U, S=S, V=V, source=m)


def _min_pivot(a: List[List[int]], t: int, rows: int, cols: int) -> Optional[Tuple[int, int]]:
    best = None
    where = None
    for i in range(t, rows):
        for j in range(t, cols):
            x = a[i][j]
            if x != 0 and (best is None or abs(x) < best):
                best = abs(x)
                where = (i, j)
                if best == 1:
                    return where
    return where


def hermite_normal_form(m: IntMatrix) -> IntMatrix:
    """Column-style Hermite normal form: H = m @ V with V unimodular.

    Pivots are positive; entries left of a pivot are reduced into [0, pivot).
    The column span (the lattice generated by the columns) is preserved, which
    makes H a membership oracle for that lattice.
    """
    w = _Worker(m, track_left=False)
    c = 0
    for r in range(w.rows):
        if c >= w.cols:
            break
        while True:
            best = None
            where = None
            for j in range(c, w.cols):
                x = w.a[r][j]
                if x != 0 and (best is None or abs(x) < best):
                    best = abs(x)
                    where = j
            if where is None:
                break
            w.swap_cols(c, where)
            p = w.a[r][c]
            done = True
            for j in range(c + 1, w.cols):
                q = w.a[r][j] // p
                w.addmul_col(j, c, -q)
                if w.a[r][j] != 0:
                    done = False
            if done:
                break
        if w.a[r][c] == 0:
            continue
        if w.a[r][c] < 0:
            w.negate_col(c)
        p = w.a[r][c]
        for j in range(c):
            q = w.a[r][j] // p  # floor division leaves remainder in [0, p)
            w.addmul_col(j, c, -q)
        c += 1
    return IntMatrix(m.rows, m.cols, w.a)


@dataclass(frozen=True)
class Solution:
    """A particular solution of a @ X = b plus the homogeneous kernel basis."""

    particular: IntMatrix
    kernel_basis: Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True)
class Infeasible:
    """Certificate that a @ X = b has no integer solution.

    In SNF coordinates (U a V = S), the transformed right side U @ b has a row
    where the diagonal divisor does not divide the entry (or the row is beyond
    the rank with a nonzero entry).  That failing position is recorded.
    """

    row: int
    column: int
    divisor: int
    value: int

    def describe(self) -> str:
        if self.divisor == 0:
            return (
                f"row {self.row} of the SNF-transformed system is outside the "
                f"image but U@b has entry {self.value} in column {self.column}"
            )
        return (
            f"divisibility fails at SNF row {self.row}, column {self.column}: "
            f"{self.divisor} does not divide {self.value}"
        )


def solve_linear(a: IntMatrix, b: IntMatrix) -> Union[Solution, Infeasible]:
    """Solve a @ X = b over the integers, for b a matrix of column targets.

    Returns a :class:`Solution` carrying one particular X and a basis of the
    homogeneous lattice {x : a @ x = 0}, or an :class:`Infeasible` certificate
    naming the SNF row where divisibility fails.
    """
    if a.rows != b.rows:
        raise ValueError(f"row mismatch: a has {a.rows} rows, b has {b.rows}")
    dec = smith_normal_form(a)
    ub = dec.U @ b
    diag = dec.diagonal()
    rank = len([d for d in diag if d != 0])
    y = [[0] * b.cols for _ in range(a.cols)]
    for j in range(b.cols):
        for i in range(a.rows):
            d = diag[i] if i < len(diag) else 0
            e = ub.data[i][j]
            if d == 0:
                if e != 0:
                    return Infeasible(row=i, column=j, divisor=0, value=e)
            else:
                if e % d != 0:
                    return Infeasible(row=i, column=j, divisor=d, value=e)
                if i < a.cols:
                    y[i][j] = e // d
    x = dec.V @ IntMatrix(a.cols, b.cols, y)
    kernel = tuple(dec.V.col(j) for j in range(rank, a.cols))
    return Solution(particular=x, kernel_basis=kernel)


def kernel_basis(a: IntMatrix) -> List[Tuple[int, ...]]:
    """Basis of the lattice {x in Z^cols : a @ x = 0}."""
    dec = smith_normal_form(a)
    rank = dec.rank()
    return [dec.V.col(j) for j in range(rank, a.cols)]


def in_column_span(a: IntMatrix, b: IntMatrix) -> bool:
    """True iff every column of b lies in the lattice spanned by a's columns."""
    return isinstance(solve_linear(a, b), Solution)


def lattice_contains(outer: IntMatrix, inner: IntMatrix) -> bool:
    """True iff colspan(inner) is a sublattice of colspan(outer)."""
    if outer.rows != inner.rows:
        raise ValueError("ambient ranks differ")
    return in_column_span(outer, inner)


def gcd_of(values: Iterable[int]) -> int:
    g = 0
    for v in values:
        g = gcd(g, v)
    return g
