"""Exact integer linear algebra: Smith normal form, kernels, cokernels, solvability, class orders."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence


class ShapeError(ValueError):
    pass


class IntMatrix:
    """Dense integer matrix with arbitrary-precision entries."""

    __slots__ = ("rows", "ncols")

    def __init__(self, rows: Iterable[Sequence[int]], ncols: int | None = None):
        self.rows = [list(map(int, r)) for r in rows]
        if ncols is None:
            if not self.rows:
                raise ShapeError("empty matrix needs an explicit column count")
            ncols = len(self.rows[0])
        self.ncols = ncols
        if any(len(r) != ncols for r in self.rows):
            raise ShapeError("ragged matrix")

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @classmethod
    def zeros(cls, m: int, n: int) -> "IntMatrix":
        return cls([[0] * n for _ in range(m)], n)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence[int]], nrows: int) -> "IntMatrix":
        return cls([[c[i] for c in cols] for i in range(nrows)], len(cols))

    def copy(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.ncols)

    def transpose(self) -> "IntMatrix":
        return IntMatrix([[r[j] for r in self.rows] for j in range(self.ncols)], self.nrows)

    def column(self, j: int) -> list[int]:
        return [r[j] for r in self.rows]

    def __matmul__(self, other):
        if isinstance(other, IntMatrix):
            if self.ncols != other.nrows:
                raise ShapeError("shape mismatch in product")
            cols = other.transpose().rows
            return IntMatrix([[sum(x * y for x, y in zip(r, c)) for c in cols] for r in self.rows], other.ncols)
        vec = list(other)
        if len(vec) != self.ncols:
            raise ShapeError("shape mismatch in matrix-vector product")
        return [sum(x * y for x, y in zip(r, vec)) for r in self.rows]

    def __eq__(self, other):
        return isinstance(other, IntMatrix) and self.shape == other.shape and self.rows == other.rows

    def __repr__(self):
        return f"IntMatrix({self.rows})"

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def hstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.nrows != other.nrows:
            raise ShapeError("row counts differ")
        return IntMatrix([a + b for a, b in zip(self.rows, other.rows)], self.ncols + other.ncols)

    def vstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.ncols != other.ncols:
            raise ShapeError("column counts differ")
        return IntMatrix(self.rows + other.rows, self.ncols)


def determinant(A: IntMatrix) -> int:
    """Bareiss fraction-free determinant."""
    n = A.nrows
    if n != A.ncols:
        raise ShapeError("determinant of a non-square matrix")
    M = A.tolist()
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k]:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1] if n else 1


# ---------------------------------------------------------------------------


@dataclass
class SmithDecomposition:
    """D = U * A * V with U, V unimodular and D diagonal with d1 | d2 | ..."""

    A: IntMatrix
    U: IntMatrix
    D: IntMatrix
    V: IntMatrix

    def __post_init__(self):
        self.check()

    @property
    def diagonal(self) -> list[int]:
        return [self.D.rows[i][i] for i in range(min(self.D.shape))]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d)

    def check(self) -> None:
        if self.U @ self.A @ self.V != self.D:
            raise AssertionError("D != U A V")
        diag = self.diagonal
        for i, row in enumerate(self.D.rows):
            for j, x in enumerate(row):
                if i != j and x:
                    raise AssertionError("D is not diagonal")
        nz = [d for d in diag if d]
        if any(d < 0 for d in diag) or nz != diag[: len(nz)]:
            raise AssertionError("diagonal must be nonnegative with zeros last")
        for a, b in zip(nz, nz[1:]):
            if b % a:
                raise AssertionError("divisibility chain broken")
        for M in (self.U, self.V):
            if abs(determinant(M)) != 1:
                raise AssertionError("transform is not unimodular")


def snf(A: IntMatrix) -> SmithDecomposition:
    """Smith normal form with deterministic pivoting.

    The pivot is the entry of smallest absolute value in the remaining block,
    ties broken row-major.
    """
    m, n = A.shape
    D = A.tolist()
    U = IntMatrix.identity(m).rows
    V = IntMatrix.identity(n).rows

    def swap_rows(i, j):
        if i != j:
            D[i], D[j] = D[j], D[i]
            U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        if i != j:
            for r in D:
                r[i], r[j] = r[j], r[i]
            for r in V:
                r[i], r[j] = r[j], r[i]

    def add_row(dst, src, k):  # row_dst += k * row_src
        D[dst] = [x + k * y for x, y in zip(D[dst], D[src])]
        U[dst] = [x + k * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, k):  # col_dst += k * col_src
        for r in D:
            r[dst] += k * r[src]
        for r in V:
            r[dst] += k * r[src]

    for t in range(min(m, n)):
        while True:
            best = None
            for i in range(t, m):
                row = D[i]
                for j in range(t, n):
                    x = row[j]
                    if x and (best is None or abs(x) < best[0]):
                        best = (abs(x), i, j)
            if best is None:
                break
            _, i, j = best
            swap_rows(t, i)
            swap_cols(t, j)
            piv = D[t][t]
            clean = True
            for i in range(t + 1, m):
                if D[i][t]:
                    add_row(i, t, -(D[i][t] // piv))
                    clean = clean and D[i][t] == 0
            for j in range(t + 1, n):
                if D[t][j]:
                    add_col(j, t, -(D[t][j] // piv))
                    clean = clean and D[t][j] == 0
            if not clean:
                continue
            # enforce divisibility of the rest of the block
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if D[i][j] % piv:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
    return SmithDecomposition(A, IntMatrix(U, m), IntMatrix(D, n), IntMatrix(V, n))


@dataclass(frozen=True)
class QuotientStructure:
    """Abelian group Z^free_rank + sum of Z/d for d in ``torsion``."""

    torsion: tuple[int, ...]
    free_rank: int

    def __str__(self):
        parts = ["Z"] * (1 if self.free_rank == 1 else 0)
        if self.free_rank > 1:
            parts = [f"Z^{self.free_rank}"]
        parts += [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) or "0"

    def pretty(self) -> str:
        parts = []
        if self.free_rank:
            parts.append("ℤ" if self.free_rank == 1 else f"ℤ^{self.free_rank}")
        parts += [f"ℤ/{d}" for d in self.torsion]
        return " ⊕ ".join(parts) or "0"

    @property
    def order(self):
        if self.free_rank:
            return None
        out = 1
        for d in self.torsion:
            out *= d
        return out

    def to_json(self) -> dict:
        return {"torsion": list(self.torsion), "free_rank": self.free_rank}


def cokernel_structure(A: IntMatrix, decomposition: SmithDecomposition | None = None) -> QuotientStructure:
    """Structure of Z^rows / A Z^cols."""
    S = decomposition or snf(A)
    diag = S.diagonal
    torsion = tuple(d for d in diag if d > 1)
    return QuotientStructure(torsion, A.nrows - S.rank)


def invariant_factors(A: IntMatrix) -> list[int]:
    return [d for d in snf(A).diagonal if d]


# ---------------------------------------------------------------------------


class NoSolution(ArithmeticError):
    """Certificate that A x = b has no integer solution.

    ``functional`` is a rational row vector lam with lam*A integral and lam*b not.
    """

    def __init__(self, functional: list[Fraction]):
        super().__init__("no integer solution")
        self.functional = functional

    def check(self, A: IntMatrix, b: Sequence[int]) -> bool:
        lam = self.functional
        cols_ok = all(sum(l * A.rows[i][j] for i, l in enumerate(lam)).denominator == 1 for j in range(A.ncols))
        rhs = sum(l * x for l, x in zip(lam, b))
        return cols_ok and rhs.denominator != 1


def solve_integer(A: IntMatrix, b: Sequence[int], decomposition: SmithDecomposition | None = None) -> list[int]:
    """An integer x with A x = b, or raise :class:`NoSolution` with a certificate."""
    b = list(b)
    if len(b) != A.nrows:
        raise ShapeError("right-hand side has the wrong length")
    S = decomposition or snf(A)
    c = S.U @ b
    diag = S.diagonal
    y = [0] * A.ncols
    for i, ci in enumerate(c):
        d = diag[i] if i < len(diag) else 0
        if d:
            if ci % d:
                raise NoSolution([Fraction(u, d) for u in S.U.rows[i]])
            y[i] = ci // d
        elif ci:
            raise NoSolution([Fraction(u, 2 * ci) for u in S.U.rows[i]])
    x = S.V @ y
    assert A @ x == b
    return x


def kernel_basis(A: IntMatrix, decomposition: SmithDecomposition | None = None) -> list[list[int]]:
    """Z-basis of {x : A x = 0}: the last columns of V."""
    S = decomposition or snf(A)
    r = S.rank
    return [S.V.column(j) for j in range(r, A.ncols)]


INFINITE = "Infinite"


def _column_echelon(A: IntMatrix):
    """Column-style Hermite echelon of A: returns pivot rows and echelon columns."""
    m, n = A.shape
    cols = [A.column(j) for j in range(n)]
    pivots, basis = [], []
    r = 0
    remaining = [c for c in cols if any(c)]
    for i in range(m):
        if not remaining:
            break
        active = [c for c in remaining if c[i]]
        if not active:
            continue
        rest = [c for c in remaining if not c[i]]
        while len(active) > 1:
            active.sort(key=lambda c: abs(c[i]))
            p = active[0]
            new = [p]
            for c in active[1:]:
                k = c[i] // p[i]
                c2 = [x - k * y for x, y in zip(c, p)]
                if c2[i]:
                    new.append(c2)
                elif any(c2):
                    rest.append(c2)
            active = new
        piv = active[0]
        if piv[i] < 0:
            piv = [-x for x in piv]
        pivots.append(i)
        basis.append(piv)
        remaining = rest
    return pivots, basis


def class_order(v: Sequence[int], A: IntMatrix):
    """Least k >= 1 with k*v in the column span of A, or ``INFINITE``."""
    v = list(v)
    if len(v) != A.nrows:
        raise ShapeError("vector length must equal the row count")
    if not any(v):
        return 1
    pivots, basis = _column_echelon(A)
    # solve sum_j x_j basis_j = v over Q by forward substitution along pivot rows
    res = [Fraction(x) for x in v]
    coeffs = []
    for i, col in zip(pivots, basis):
        x = res[i] / col[i]
        coeffs.append(x)
        if x:
            res = [r - x * c for r, c in zip(res, col)]
    if any(res):
        return INFINITE
    k = 1
    for x in coeffs:
        k = k * x.denominator // gcd(k, x.denominator)
    # the coefficients are unique (echelon columns are independent), so k*v in span iff k*x integral
    return k


def rank(A: IntMatrix) -> int:
    return len(_column_echelon(A)[0])
