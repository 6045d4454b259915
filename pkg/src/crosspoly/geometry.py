"""Exact L1-ball primitives shared by all engines.

All predicates here work in exact rational arithmetic.  Inputs may be ints,
``Fraction``s, decimal/fraction strings (``"3/10"``, ``"0.3"``) or floats;
floats are read through their shortest repr, so ``0.3`` means ``3/10``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .exceptions import InvalidInstance

Vector = tuple[Fraction, ...]


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise InvalidInstance(f"not a number: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise InvalidInstance(f"non-finite coordinate: {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInstance(f"cannot parse rational {x!r}") from exc
    try:
        return Fraction(x)
    except (TypeError, ValueError) as exc:
        raise InvalidInstance(f"cannot parse rational {x!r}") from exc


def as_vector(xs: Iterable) -> Vector:
    try:
        v = tuple(as_fraction(x) for x in xs)
    except TypeError as exc:
        raise InvalidInstance(f"not a vector: {xs!r}") from exc
    if not v:
        raise InvalidInstance("vectors must have dimension >= 1")
    return v


def format_fraction(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class CrossPolytope:
    """The L1-ball ``{x : ||x - center||_1 <= radius}``."""

    center: Vector
    radius: Fraction

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        object.__setattr__(self, "radius", as_fraction(self.radius))
        if self.radius < 0:
            raise InvalidInstance(f"negative radius {self.radius}")

    @property
    def n(self) -> int:
        return len(self.center)

    def halfspaces(self) -> list[tuple[Vector, Fraction]]:
        """The 2**n facet inequalities ``<sigma, x> <= r + <sigma, c>``."""
        out = []
        for mask in range(1 << self.n):
            sigma = tuple(Fraction(-1 if mask >> i & 1 else 1) for i in range(self.n))
            out.append((sigma, self.radius + dot(sigma, self.center)))
        return out

    def __contains__(self, x) -> bool:
        return contains(self, x)


def dot(u: Sequence, v: Sequence) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def l1_norm(v: Iterable) -> Fraction:
    return sum((abs(as_fraction(x)) for x in v), Fraction(0))


def cross_polytope_volume(n: int, r=1) -> Fraction:
    """``2**n r**n / n!``."""
    if n < 1:
        raise InvalidInstance("dimension must be >= 1")
    r = as_fraction(r)
    if r < 0:
        raise InvalidInstance(f"negative radius {r}")
    return Fraction(2**n) * r**n / math.factorial(n)


def contains(ball: CrossPolytope, x) -> bool:
    x = as_vector(x)
    if len(x) != ball.n:
        raise InvalidInstance(f"point has dimension {len(x)}, ball has {ball.n}")
    return l1_norm(a - b for a, b in zip(x, ball.center)) <= ball.radius


def normalize_pair(first: CrossPolytope, second: CrossPolytope) -> tuple[Vector, Fraction, Fraction]:
    """Reduce a pair of balls to ``C(0,1)`` and ``C(c, r)`` with ``c >= 0``.

    Returns ``(c, r, scale)`` with ``vol(first & second) == scale * vol(C(0,1) & C(c,r))``.
    Coordinate sign flips are absorbed into ``c``.  The ratio ``r`` exceeds 1 when the
    second ball is the larger one; pass the larger ball first to feed the FPTAS.
    """
    if first.n != second.n:
        raise InvalidInstance("balls of different dimension")
    if first.radius <= 0 or second.radius <= 0:
        raise InvalidInstance("normalize_pair needs strictly positive radii")
    r1 = first.radius
    c = tuple(abs(a - b) / r1 for a, b in zip(first.center, second.center))
    return c, second.radius / r1, r1**first.n
