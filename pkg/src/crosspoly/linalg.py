"""Exact linear algebra over the rationals.

Small dense systems only (dimension <= ~10).  Everything is plain
``fractions.Fraction`` so sign decisions are never subject to roundoff.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list[Fraction]]


def _copy(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def _eliminate(a: Matrix, ncols: int) -> tuple[Matrix, list[int], int]:
    """Row-reduce ``a`` in place on its first ``ncols`` columns.

    Returns the matrix, the pivot columns and the number of row swaps.
    """
    pivots = []
    swaps = 0
    row = 0
    nrows = len(a)
    for col in range(ncols):
        if row >= nrows:
            break
        piv = next((i for i in range(row, nrows) if a[i][col] != 0), None)
        if piv is None:
            continue
        if piv != row:
            a[row], a[piv] = a[piv], a[row]
            swaps += 1
        p = a[row][col]
        for i in range(row + 1, nrows):
            f = a[i][col]
            if f:
                f /= p
                ai, ar = a[i], a[row]
                for j in range(col, len(ar)):
                    ai[j] -= f * ar[j]
        pivots.append(col)
        row += 1
    return a, pivots, swaps


def det(rows: Sequence[Sequence]) -> Fraction:
    a = _copy(rows)
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("determinant of a non-square matrix")
    a, pivots, swaps = _eliminate(a, n)
    if len(pivots) < n:
        return Fraction(0)
    out = Fraction(-1 if swaps % 2 else 1)
    for i in range(n):
        out *= a[i][i]
    return out


def rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    a = _copy(rows)
    _, pivots, _ = _eliminate(a, len(a[0]))
    return len(pivots)


def solve(rows: Sequence[Sequence], rhs: Sequence) -> list[Fraction] | None:
    """Solve the square system ``rows @ x = rhs``; ``None`` if singular."""
    n = len(rows)
    a = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(rows, rhs)]
    a, pivots, _ = _eliminate(a, n)
    if len(pivots) < n:
        return None
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        s = a[i][n]
        for j in range(i + 1, n):
            s -= a[i][j] * x[j]
        x[i] = s / a[i][i]
    return x
