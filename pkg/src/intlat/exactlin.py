"""Exact integer/rational matrix algebra.

Everything in this module (and in the package) is arbitrary-precision:
entries are Python ints or ``fractions.Fraction``.  No operation here
rounds, and floating point is never used.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import LatticeError, SingularMatrixError

Scalar = int | Fraction


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise LatticeError(f"matrix entries must be exact (int/Fraction), got {type(x).__name__}")


class Matrix:
    """Immutable matrix with exact rational entries."""

    __slots__ = ("_rows", "nrows", "ncols")

    def __init__(self, rows: Iterable[Iterable[Scalar]]):
        data = tuple(tuple(_frac(x) for x in row) for row in rows)
        if not data:
            raise LatticeError("empty matrix")
        width = len(data[0])
        if width == 0 or any(len(r) != width for r in data):
            raise LatticeError("ragged or zero-width matrix")
        object.__setattr__(self, "_rows", data)
        object.__setattr__(self, "nrows", len(data))
        object.__setattr__(self, "ncols", width)

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zero(cls, nrows: int, ncols: int) -> "Matrix":
        return cls([[0] * ncols for _ in range(nrows)])

    @classmethod
    def diagonal(cls, entries: Sequence[Scalar]) -> "Matrix":
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def rows(self) -> tuple[tuple[Fraction, ...], ...]:
        return self._rows

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self._rows[i]

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self._rows[i][j]

    def __eq__(self, other) -> bool:
        return isinstance(other, Matrix) and self._rows == other._rows

    def __hash__(self) -> int:
        return hash(self._rows)

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in row) for row in self._rows)
        return f"Matrix([{body}])"

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same_shape(other)
        return Matrix([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self._rows, other._rows)])

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same_shape(other)
        return Matrix([[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self._rows, other._rows)])

    def __neg__(self) -> "Matrix":
        return Matrix([[-a for a in row] for row in self._rows])

    def __mul__(self, c: Scalar) -> "Matrix":
        c = _frac(c)
        return Matrix([[a * c for a in row] for row in self._rows])

    __rmul__ = __mul__

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.nrows:
            raise LatticeError(f"shape mismatch: {self.shape} @ {other.shape}")
        cols = tuple(zip(*other._rows))
        return Matrix(
            [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in self._rows]
        )

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def T(self) -> "Matrix":
        return Matrix(list(zip(*self._rows)))

    def is_symmetric(self) -> bool:
        return self.nrows == self.ncols and all(
            self._rows[i][j] == self._rows[j][i]
            for i in range(self.nrows)
            for j in range(i + 1, self.ncols)
        )

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for row in self._rows for x in row)

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def to_int_rows(self) -> list[list[int]]:
        if not self.is_integral():
            raise LatticeError("matrix is not integral")
        return [[int(x) for x in row] for row in self._rows]

    def common_denominator(self) -> int:
        d = 1
        for row in self._rows:
            for x in row:
                d = d * x.denominator // math.gcd(d, x.denominator)
        return d

    def det(self) -> Fraction:
        """Determinant by exact fraction-free-ish Gaussian elimination."""
        if not self.is_square():
            raise LatticeError("determinant of a non-square matrix")
        a = [list(row) for row in self._rows]
        n = self.nrows
        det = Fraction(1)
        for k in range(n):
            piv = next((i for i in range(k, n) if a[i][k] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != k:
                a[k], a[piv] = a[piv], a[k]
                det = -det
            det *= a[k][k]
            inv = 1 / a[k][k]
            for i in range(k + 1, n):
                if a[i][k] == 0:
                    continue
                f = a[i][k] * inv
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
        return det

    def inverse(self) -> "Matrix":
        """Exact inverse; raises SingularMatrixError when det = 0."""
        if not self.is_square():
            raise LatticeError("inverse of a non-square matrix")
        n = self.nrows
        a = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(self._rows)]
        for k in range(n):
            piv = next((i for i in range(k, n) if a[i][k] != 0), None)
            if piv is None:
                raise SingularMatrixError("matrix is singular")
            if piv != k:
                a[k], a[piv] = a[piv], a[k]
            inv = 1 / a[k][k]
            a[k] = [x * inv for x in a[k]]
            for i in range(n):
                if i != k and a[i][k] != 0:
                    f = a[i][k]
                    a[i] = [x - f * y for x, y in zip(a[i], a[k])]
        return Matrix([row[n:] for row in a])

    def rank(self) -> int:
        a = [list(row) for row in self._rows]
        rank = 0
        for col in range(self.ncols):
            piv = next((i for i in range(rank, self.nrows) if a[i][col] != 0), None)
            if piv is None:
                continue
            a[rank], a[piv] = a[piv], a[rank]
            inv = 1 / a[rank][col]
            for i in range(rank + 1, self.nrows):
                if a[i][col] != 0:
                    f = a[i][col] * inv
                    for j in range(col, self.ncols):
                        a[i][j] -= f * a[rank][j]
            rank += 1
        return rank

    def stack(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.ncols:
            raise LatticeError("column count mismatch in stack")
        return Matrix(self._rows + other._rows)


def block_diagonal(blocks: Sequence[Matrix]) -> Matrix:
    """Direct sum of square blocks."""
    if not blocks:
        raise LatticeError("no blocks")
    n = sum(b.nrows for b in blocks)
    rows = []
    offset = 0
    for b in blocks:
        if not b.is_square():
            raise LatticeError("blocks must be square")
        for r in b.rows:
            rows.append([Fraction(0)] * offset + list(r) + [Fraction(0)] * (n - offset - b.ncols))
        offset += b.ncols
    return Matrix(rows)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b), g >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def hnf(m: Matrix) -> tuple[Matrix, Matrix]:
    """Row Hermite normal form.

    Returns (H, U) with U unimodular, U @ m = H, pivots positive,
    entries above each pivot reduced into [0, pivot), zero rows last.
    The integer input requirement is checked.
    """
    a = m.to_int_rows()
    nrows, ncols = m.nrows, m.ncols
    u = [[int(i == j) for j in range(nrows)] for i in range(nrows)]
    row = 0
    for col in range(ncols):
        if row >= nrows:
            break
        piv = next((i for i in range(row, nrows) if a[i][col] != 0), None)
        if piv is None:
            continue
        if piv != row:
            a[row], a[piv] = a[piv], a[row]
            u[row], u[piv] = u[piv], u[row]
        for i in range(row + 1, nrows):
            if a[i][col] == 0:
                continue
            if a[i][col] % a[row][col] == 0:
                f = a[i][col] // a[row][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[row])]
                u[i] = [x - f * y for x, y in zip(u[i], u[row])]
                continue
            g, s, t = _xgcd(a[row][col], a[i][col])
            p, q = a[row][col] // g, a[i][col] // g
            a[row], a[i] = (
                [s * x + t * y for x, y in zip(a[row], a[i])],
                [-q * x + p * y for x, y in zip(a[row], a[i])],
            )
            u[row], u[i] = (
                [s * x + t * y for x, y in zip(u[row], u[i])],
                [-q * x + p * y for x, y in zip(u[row], u[i])],
            )
        if a[row][col] < 0:
            a[row] = [-x for x in a[row]]
            u[row] = [-x for x in u[row]]
        for i in range(row):
            q = a[i][col] // a[row][col]
            if q:
                a[i] = [x - q * y for x, y in zip(a[i], a[row])]
                u[i] = [x - q * y for x, y in zip(u[i], u[row])]
        row += 1
    return Matrix(a), Matrix(u)


def snf(m: Matrix) -> tuple[Matrix, Matrix, Matrix]:
    """Smith normal form: (D, U, V) with U @ m @ V = D, d1 | d2 | ...

    U and V are unimodular; the diagonal entries are nonnegative.
    """
    a = m.to_int_rows()
    nrows, ncols = m.nrows, m.ncols
    u = [[int(i == j) for j in range(nrows)] for i in range(nrows)]
    v = [[int(i == j) for j in range(ncols)] for i in range(ncols)]

    def clear_row_entry(pivot_row, i):
        """Zero a[i][pivot] using row ops; leaves the pivot row alone when
        the entry is already divisible (required for termination)."""
        piv, entry = a[pivot_row][pivot_row], a[i][pivot_row]
        if entry % piv == 0:
            f = entry // piv
            a[i] = [x - f * y for x, y in zip(a[i], a[pivot_row])]
            u[i] = [x - f * y for x, y in zip(u[i], u[pivot_row])]
            return
        g, s, t = _xgcd(piv, entry)
        p, q = piv // g, entry // g
        a[pivot_row], a[i] = (
            [s * x + t * y for x, y in zip(a[pivot_row], a[i])],
            [-q * x + p * y for x, y in zip(a[pivot_row], a[i])],
        )
        u[pivot_row], u[i] = (
            [s * x + t * y for x, y in zip(u[pivot_row], u[i])],
            [-q * x + p * y for x, y in zip(u[pivot_row], u[i])],
        )

    def clear_col_entry(pivot_col, j):
        piv, entry = a[pivot_col][pivot_col], a[pivot_col][j]
        if entry % piv == 0:
            f = entry // piv
            for r in (a, v):
                for row_ in r:
                    row_[j] -= f * row_[pivot_col]
            return
        g, s, t = _xgcd(piv, entry)
        p, q = piv // g, entry // g
        for r in (a, v):
            for row_ in r:
                x, y = row_[pivot_col], row_[j]
                row_[pivot_col], row_[j] = s * x + t * y, -q * x + p * y

    t = 0
    while t < min(nrows, ncols):
        # Find a nonzero pivot in the remaining block.
        piv = None
        for i in range(t, nrows):
            for j in range(t, ncols):
                if a[i][j] != 0:
                    piv = (i, j)
                    break
            if piv:
                break
        if piv is None:
            break
        i, j = piv
        if i != t:
            a[t], a[i] = a[i], a[t]
            u[t], u[i] = u[i], u[t]
        if j != t:
            for r in (a, v):
                for row_ in r:
                    row_[t], row_[j] = row_[j], row_[t]
        while True:
            # Clear column t below the pivot.
            for i in range(t + 1, nrows):
                if a[i][t]:
                    clear_row_entry(t, i)
            # Clear row t right of the pivot (may refill the column).
            for j in range(t + 1, ncols):
                if a[t][j]:
                    clear_col_entry(t, j)
            if all(a[i][t] == 0 for i in range(t + 1, nrows)):
                # Enforce divisibility d_t | every remaining entry.
                bad = None
                for i in range(t + 1, nrows):
                    for j in range(t + 1, ncols):
                        if a[i][j] % a[t][t]:
                            bad = i
                            break
                    if bad:
                        break
                if bad is None:
                    break
                a[t] = [x + y for x, y in zip(a[t], a[bad])]
                u[t] = [x + y for x, y in zip(u[t], u[bad])]
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return Matrix(a), Matrix(u), Matrix(v)


def invariant_factors(m: Matrix) -> list[int]:
    """Nonzero diagonal entries of the Smith form, in dividing order."""
    d, _, _ = snf(m)
    return [int(d[i, i]) for i in range(min(d.nrows, d.ncols)) if d[i, i] != 0]


def rat_inverse(m: Matrix) -> Matrix:
    """Exact rational inverse (module-level alias for Matrix.inverse)."""
    return m.inverse()


def signature(g: Matrix) -> tuple[int, int, int]:
    """Signature (n_plus, n_minus, n_zero) of a symmetric rational matrix.

    Computed by exact congruence diagonalization; zero diagonal pivots are
    repaired with the x -> x + y trick, so Gram matrices of hyperbolic
    planes are handled.
    """
    if not g.is_symmetric():
        raise LatticeError("signature requires a symmetric matrix")
    n = g.nrows
    a = [list(row) for row in g.rows]
    n_plus = n_minus = n_zero = 0

    def add_row_col(dst, src, c):
        for j in range(n):
            a[dst][j] += c * a[src][j]
        for i in range(n):
            a[i][dst] += c * a[i][src]

    for k in range(n):
        if a[k][k] == 0:
            j = next((j for j in range(k + 1, n) if a[k][j] != 0), None)
            if j is None:
                n_zero += 1
                continue
            if a[j][j] != 0:
                a[k], a[j] = a[j], a[k]
                for row_ in a:
                    row_[k], row_[j] = row_[j], row_[k]
            else:
                add_row_col(k, j, Fraction(1))
        pivot = a[k][k]
        if pivot > 0:
            n_plus += 1
        else:
            n_minus += 1
        for i in range(k + 1, n):
            if a[i][k] != 0:
                add_row_col(i, k, -a[i][k] / pivot)
    return n_plus, n_minus, n_zero


def kernel_mod2(m: Matrix) -> list[tuple[int, ...]]:
    """Basis of {x in F2^nrows : x @ m = 0 over F2}.

    Rows of the result are 0/1 tuples, F2-independent, spanning the kernel.
    """
    ints = m.to_int_rows()
    nrows, ncols = m.nrows, m.ncols
    # Row-reduce [m | I] over F2; kernel basis = identity parts of zero rows.
    aug = [[x & 1 for x in row] + [int(i == j) for j in range(nrows)] for i, row in enumerate(ints)]
    row = 0
    for col in range(ncols):
        piv = next((i for i in range(row, nrows) if aug[i][col]), None)
        if piv is None:
            continue
        aug[row], aug[piv] = aug[piv], aug[row]
        for i in range(nrows):
            if i != row and aug[i][col]:
                aug[i] = [x ^ y for x, y in zip(aug[i], aug[row])]
        row += 1
    return [tuple(r[ncols:]) for r in aug[row:]]
