"""Ground-truth engines for desk-scale instances.

Exact volumes come from brute-force vertex/facet enumeration in rational
arithmetic, so they are only practical up to dimension 4.  The Monte Carlo
estimator and the #LARGE-SET enumerator round out the toolbox used by the
test-suite and by ``crosspoly oracle``/``crosspoly check``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np

from . import linalg
from .exceptions import InvalidInstance, PreconditionViolation
from .geometry import CrossPolytope, Vector, as_vector, dot

MAX_EXACT_DIM = 4


def _check_dim(n: int) -> None:
    if n < 1:
        raise InvalidInstance("dimension must be >= 1")
    if n > MAX_EXACT_DIM:
        raise InvalidInstance(f"exact oracles refuse n={n} > {MAX_EXACT_DIM}")


def _affine_rank(points: Sequence[Vector]) -> int:
    p0 = points[0]
    return linalg.rank([[a - b for a, b in zip(p, p0)] for p in points[1:]])


def _centroid(points: Sequence[Vector]) -> Vector:
    n = len(points[0])
    m = len(points)
    return tuple(sum((p[i] for p in points), Fraction(0)) / m for i in range(n))


def _drop(v: Vector, j: int) -> Vector:
    return v[:j] + v[j + 1:]


def _cone_volume(tight: list[Vector], normal: Vector, height: Fraction) -> Fraction:
    # Cone over a facet lying in {<normal, x> = const}; ``height`` is the
    # normal-scaled distance from the apex. Projecting the facet along the
    # coordinate with the largest normal entry keeps the base non-degenerate.
    n = len(normal)
    j = max(range(n), key=lambda i: abs(normal[i]))
    base = exact_hull_volume([_drop(v, j) for v in tight])
    return height * base / (n * abs(normal[j]))


def exact_hull_volume(points) -> Fraction:
    """Volume of ``conv(points)`` by facet enumeration and cones from the centroid.

    Handles facets with more than ``n`` points (no general-position
    assumption) by recursing into the facet.  Lower-dimensional hulls have
    volume 0.
    """
    pts = sorted({as_vector(p) for p in points})
    if not pts:
        return Fraction(0)
    n = len(pts[0])
    if any(len(p) != n for p in pts):
        raise InvalidInstance("points of mixed dimension")
    if n == 1:
        return pts[-1][0] - pts[0][0]
    if len(pts) < n + 1 or _affine_rank(pts) < n:
        return Fraction(0)

    x0 = _centroid(pts)
    ys = [tuple(a - b for a, b in zip(p, x0)) for p in pts]
    ones = [Fraction(1)] * n
    seen: set[Vector] = set()
    total = Fraction(0)
    for idx in combinations(range(len(ys)), n):
        a = linalg.solve([ys[i] for i in idx], ones)
        if a is None:
            continue
        a = tuple(a)
        if a in seen:
            continue
        vals = [dot(a, y) for y in ys]
        if all(v <= 1 for v in vals):
            seen.add(a)
            tight = [y for y, v in zip(ys, vals) if v == 1]
            total += _cone_volume(tight, a, Fraction(1))
    return total


def halfspace_volume(A, b) -> Fraction:
    """Volume of the H-polytope ``{x : A x <= b}`` (assumed bounded)."""
    A = [as_vector(row) for row in A]
    b = [Fraction(x) for x in b]
    n = len(A[0])
    if n == 1:
        lo, hi = None, None
        for (a,), bi in zip(A, b):
            if a > 0:
                hi = bi / a if hi is None else min(hi, bi / a)
            elif a < 0:
                lo = bi / a if lo is None else max(lo, bi / a)
            elif bi < 0:
                return Fraction(0)
        if lo is None or hi is None:
            raise InvalidInstance("unbounded 1-D polytope")
        return max(hi - lo, Fraction(0))

    verts: set[Vector] = set()
    for idx in combinations(range(len(A)), n):
        x = linalg.solve([A[i] for i in idx], [b[i] for i in idx])
        if x is None:
            continue
        if all(dot(row, x) <= bi for row, bi in zip(A, b)):
            verts.add(tuple(x))
    verts = sorted(verts)
    if len(verts) < n + 1 or _affine_rank(verts) < n:
        return Fraction(0)

    x0 = _centroid(verts)
    # Scale-normalise each inequality so duplicated facets collapse.
    planes = {}
    for row, bi in zip(A, b):
        piv = next(abs(a) for a in row if a != 0)
        planes[tuple(a / piv for a in row) + (bi / piv,)] = None
    total = Fraction(0)
    for key in planes:
        a, bi = key[:-1], key[-1]
        tight = [v for v in verts if dot(a, v) == bi]
        if len(tight) < n:
            continue
        tight = [tuple(p - q for p, q in zip(v, x0)) for v in tight]
        total += _cone_volume(tight, a, bi - dot(a, x0))
    return total


def _ball_system(balls: Sequence[CrossPolytope]):
    A, b = [], []
    for ball in balls:
        for sigma, rhs in ball.halfspaces():
            A.append(sigma)
            b.append(rhs)
    return A, b


def exact_intersection_volume(balls: Sequence[CrossPolytope]) -> Fraction:
    """Exact volume of the intersection of L1-balls, ``n <= 4``."""
    balls = list(balls)
    if not balls:
        raise InvalidInstance("need at least one ball")
    n = balls[0].n
    if any(b.n != n for b in balls):
        raise InvalidInstance("balls of different dimension")
    _check_dim(n)
    if any(b.radius == 0 for b in balls):
        return Fraction(0)
    return halfspace_volume(*_ball_system(balls))


def box_clipped_intersection_volume(centers: Sequence, levels: Sequence) -> Fraction:
    """Volume of ``{x in [-1,1]^i : ||x - centers[l]||_1 <= levels[l] for all l}``.

    This is the un-approximated convolution value the staircase tables
    bracket (scaled by ``2**i`` it is a joint probability for a uniform point
    in the cube).  ``i == 0`` is the indicator of ``levels >= 0``.
    """
    levels = [Fraction(x) for x in levels]
    if any(x < 0 for x in levels):
        return Fraction(0)
    centers = [tuple(Fraction(x) for x in c) for c in centers]
    i = len(centers[0]) if centers else 0
    if i == 0:
        return Fraction(1)
    _check_dim(i)
    if any(x == 0 for x in levels):
        return Fraction(0)
    A, b = _ball_system([CrossPolytope(c, u) for c, u in zip(centers, levels)])
    for j in range(i):
        for s in (1, -1):
            e = [Fraction(0)] * i
            e[j] = Fraction(s)
            A.append(tuple(e))
            b.append(Fraction(1))
    return halfspace_volume(A, b)


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    half_width: float
    samples: int
    seed: int

    @property
    def interval(self) -> tuple[float, float]:
        return self.estimate - self.half_width, self.estimate + self.half_width


def mc_volume(balls: Sequence[CrossPolytope], samples: int, seed: int = 0,
              chunk: int = 1 << 18) -> MCEstimate:
    """Rejection-sampling estimate over the cube ``[-1,1]^n``.

    The first ball must be centred at the origin with radius <= 1 so the
    whole intersection lies in the sampling box.
    """
    balls = list(balls)
    if samples <= 0:
        raise InvalidInstance("samples must be positive")
    if not balls:
        raise InvalidInstance("need at least one ball")
    first = balls[0]
    if any(x != 0 for x in first.center) or first.radius > 1:
        raise PreconditionViolation("first ball must be C(0, r) with r <= 1")
    n = first.n
    centers = np.array([[float(x) for x in b.center] for b in balls])
    radii = np.array([float(b.radius) for b in balls])
    rng = np.random.default_rng(seed)
    hits = 0
    left = samples
    while left:
        m = min(chunk, left)
        x = rng.uniform(-1.0, 1.0, size=(m, n))
        inside = np.ones(m, dtype=bool)
        for c, r in zip(centers, radii):
            inside &= np.abs(x - c).sum(axis=1) <= r
        hits += int(inside.sum())
        left -= m
    p = hits / samples
    box = float(2**n)
    return MCEstimate(box * p, box * 1.96 * math.sqrt(p * (1 - p) / samples), samples, seed)


def _positive_ints(a) -> tuple[int, ...]:
    out = []
    for x in a:
        if isinstance(x, bool) or not isinstance(x, (int, np.integer)):
            try:
                f = Fraction(x)
            except (TypeError, ValueError) as exc:
                raise InvalidInstance(f"not an integer: {x!r}") from exc
            if f.denominator != 1:
                raise InvalidInstance(f"not an integer: {x!r}")
            x = f.numerator
        if x < 1:
            raise InvalidInstance(f"entries must be positive integers, got {x}")
        out.append(int(x))
    if not out:
        raise InvalidInstance("empty vector")
    return tuple(out)


class LargeSetCount(NamedTuple):
    count: int
    partitions: int


def count_large_sets(a) -> LargeSetCount:
    """Count sign vectors with ``<sigma, a> > 0`` by enumerating all ``2**n``.

    ``partitions`` is the number of sign vectors with ``<sigma, a> == 0``.
    """
    a = _positive_ints(a)
    n = len(a)
    if n > 24:
        raise InvalidInstance("enumeration limited to n <= 24")
    if sum(a) % 2:
        raise PreconditionViolation("||a||_1 must be even")
    sums = np.zeros(1, dtype=np.int64)
    for x in a:
        sums = np.concatenate([sums + x, sums - x])
    count = int(np.count_nonzero(sums > 0))
    return LargeSetCount(count, 2**n - 2 * count)


class ReductionCheck(NamedTuple):
    lhs: int
    rhs: int
    passed: bool


def reduction_parameters(a) -> tuple[Fraction, Fraction]:
    """Shift ``delta`` and shell width ``eps`` with ``eps < delta < 0.1/(n 2^n ||a||_1)``."""
    a = _positive_ints(a)
    n = len(a)
    delta = Fraction(9, 100) / (n * 2**n * sum(a))
    return delta, delta / 2


def hardness_reduction_check(a) -> ReductionCheck:
    """Recover the #LARGE-SET count from exact volumes of a thin L1 shell.

    The shell ``C(delta a, 1) & C(0, 1+eps)`` minus ``C(0, 1)`` has volume close
    to ``eps/(n-1)!`` times the count; rounding recovers it exactly.
    """
    a = _positive_ints(a)
    n = len(a)
    if n > 3:
        raise InvalidInstance("reduction check limited to n <= 3")
    rhs = count_large_sets(a).count
    delta, eps = reduction_parameters(a)
    shifted = CrossPolytope(tuple(delta * x for x in a), 1)
    origin = (Fraction(0),) * n
    outer = CrossPolytope(origin, 1 + eps)
    inner = CrossPolytope(origin, 1)
    shell = (exact_intersection_volume([shifted, outer])
             - exact_intersection_volume([shifted, outer, inner]))
    x = math.factorial(n - 1) * shell / eps
    lhs = math.floor(x + Fraction(1, 2)) if x >= 0 else -math.floor(-x + Fraction(1, 2))
    return ReductionCheck(lhs, rhs, lhs == rhs)
