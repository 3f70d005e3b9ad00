"""Small exact linear-algebra helpers used across the package.

Matrices are lists of lists over an exact field-like element type:
Fraction, RationalFunction, or jets.  Pivoting only needs an
"invertible element" predicate, supplied per element type.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Sequence

from .errors import DegenerateFrameError

Matrix = list[list]


def frac_pivotable(x) -> bool:
    return x != 0


def rf_pivotable(x) -> bool:
    return not x.is_zero


def jet_pivotable(x) -> bool:
    return x.constant_term() != 0


def identity(n: int, one, zero) -> Matrix:
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = a[i][0] * b[0][j]
            for l in range(1, k):
                acc = acc + a[i][l] * b[l][j]
            row.append(acc)
        out.append(row)
    return out


def mat_vec(a: Matrix, v: Sequence) -> list:
    return [sum_elems(a[i][j] * v[j] for j in range(len(v))) for i in range(len(a))]


def sum_elems(items) -> object:
    it = iter(items)
    acc = next(it)
    for x in it:
        acc = acc + x
    return acc


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


def invert_matrix(a: Matrix, zero, one, pivotable: Callable = frac_pivotable) -> Matrix:
    """Gauss-Jordan inverse over an exact field; raises on singular input."""
    n = len(a)
    m = [list(row) for row in a]
    inv = identity(n, one, zero)
    for col in range(n):
        pivot = next((r for r in range(col, n) if pivotable(m[r][col])), None)
        if pivot is None:
            raise DegenerateFrameError(f"matrix singular at column {col}")
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            inv[col], inv[pivot] = inv[pivot], inv[col]
        p = m[col][col]
        for j in range(n):
            m[col][j] = m[col][j] / p
            inv[col][j] = inv[col][j] / p
        for r in range(n):
            if r != col:
                f = m[r][col]
                if pivotable(f) or f != zero:
                    for j in range(n):
                        m[r][j] = m[r][j] - f * m[col][j]
                        inv[r][j] = inv[r][j] - f * inv[col][j]
    return inv


def det_fractions(a: Matrix) -> Fraction:
    n = len(a)
    m = [[Fraction(x) for x in row] for row in a]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        p = m[col][col]
        for r in range(col + 1, n):
            if m[r][col]:
                f = m[r][col] / p
                for j in range(col, n):
                    m[r][j] -= f * m[col][j]
    return det


def rank_fractions(a: Matrix) -> int:
    if not a:
        return 0
    rows = [[Fraction(x) for x in row] for row in a]
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank][col]
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                f = rows[r][col] / p
                for j in range(col, ncols):
                    rows[r][j] -= f * rows[rank][j]
        rank += 1
        if rank == len(rows):
            break
    return rank


def solve_fractions(a: Matrix, b: Sequence[Fraction]) -> list[Fraction]:
    """Solve a (possibly overdetermined but consistent) exact system."""
    rows = [[Fraction(x) for x in row] + [Fraction(bv)] for row, bv in zip(a, b)]
    ncols = len(a[0])
    pivots: list[tuple[int, int]] = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        p = rows[r][col]
        rows[r] = [x / p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append((r, col))
        r += 1
    for i in range(r, len(rows)):
        if rows[i][ncols] != 0:
            raise DegenerateFrameError("inconsistent linear system")
    x = [Fraction(0)] * ncols
    for row, col in pivots:
        x[col] = rows[row][ncols]
    return x


def nullspace_fractions(a: Matrix) -> list[list[Fraction]]:
    rows = [[Fraction(x) for x in row] for row in a]
    if not rows:
        return []
    ncols = len(rows[0])
    r = 0
    pivots: list[int] = []
    for col in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        p = rows[r][col]
        rows[r] = [x / p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    basis = []
    free = [c for c in range(ncols) if c not in pivots]
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for row_idx, pc in enumerate(pivots):
            v[pc] = -rows[row_idx][fc]
        basis.append(v)
    return basis
