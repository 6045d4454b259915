"""Exact volume of ``conv(V)`` for ``|V| = n + k`` vertices.

Every ``n``-subset ``U`` whose plane ``{a^T x = 1}`` leaves all vertices on
the origin side spans a facet; the polytope is the union of the simplices
``conv(0, U)`` over those facets.  With the origin moved to the vertex
centroid that costs ``C(n+k, n)`` exact ``n x n`` solves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Optional, Sequence

from . import linalg
from .exceptions import DegenerateInput, InternalInconsistency, InvalidInstance, OriginNotInterior
from .geometry import Vector, as_vector, dot


@dataclass(frozen=True)
class VPolytopeInstance:
    """Vertex list, re-centred on ingestion so the centroid sits at the origin.

    ``offset`` holds the original centroid.  Points that are not vertices
    of the hull are not detected.
    """

    vertices: tuple[Vector, ...]
    offset: Vector = ()

    def __post_init__(self):
        pts = [as_vector(v) for v in self.vertices]
        if not pts:
            raise InvalidInstance("empty vertex list")
        n = len(pts[0])
        if any(len(p) != n for p in pts):
            raise InvalidInstance("vertices of mixed dimension")
        if len(pts) < n + 1:
            raise OriginNotInterior(f"{len(pts)} points cannot span dimension {n}")
        if len(set(pts)) != len(pts):
            raise DegenerateInput("repeated vertex")
        m = len(pts)
        centroid = tuple(sum((p[i] for p in pts), Fraction(0)) / m for i in range(n))
        shifted = tuple(tuple(a - b for a, b in zip(p, centroid)) for p in pts)
        # The centroid of an affinely spanning set is interior to its hull.
        if linalg.rank(shifted) < n:
            raise OriginNotInterior("vertices do not span the full dimension")
        object.__setattr__(self, "vertices", shifted)
        object.__setattr__(self, "offset", centroid)

    @property
    def n(self) -> int:
        return len(self.vertices[0])

    @property
    def k(self) -> int:
        return len(self.vertices) - self.n


def facet_test(U: Sequence[Vector], V: Sequence[Vector]) -> Optional[Vector]:
    """Normal ``a`` with ``a^T u = 1`` on ``U`` and ``a^T v <= 1`` on ``V``, else ``None``."""
    U = [as_vector(u) for u in U]
    n = len(U[0])
    if len(U) != n:
        raise InvalidInstance(f"need exactly {n} points, got {len(U)}")
    a = linalg.solve(U, [Fraction(1)] * n)
    if a is None:
        return None
    vals = [dot(a, v) for v in V]
    if all(x <= 1 for x in vals):
        return tuple(a)
    if all(x >= 1 for x in vals):
        # Only possible when the origin is outside conv(V).
        raise InternalInconsistency("all vertices beyond the plane; origin is not interior")
    return None


def _cone(args) -> Optional[tuple[Vector, Fraction]]:
    U, V = args
    a = facet_test(U, V)
    if a is None:
        return None
    return a, abs(linalg.det(U))


def facets(inst: VPolytopeInstance, map_fn: Callable = map) -> list[tuple[tuple[int, ...], Vector]]:
    """Passing subsets as ``(indices, normal)`` pairs, in lexicographic order."""
    return [(idx, hit[0]) for idx, hit in _scan(inst, map_fn)]


def _scan(inst: VPolytopeInstance, map_fn: Callable) -> Iterable:
    V = inst.vertices
    subsets = list(combinations(range(len(V)), inst.n))
    results = map_fn(_cone, [([V[i] for i in idx], V) for idx in subsets])
    seen = {}
    for idx, hit in zip(subsets, results):
        if hit is None:
            continue
        # a^T x = 1 is already the canonical form of a plane missing the origin.
        if hit[0] in seen:
            raise DegenerateInput(
                f"subsets {seen[hit[0]]} and {idx} span the same facet; vertices not in general position")
        seen[hit[0]] = idx
        yield idx, hit


def exact_volume(inst: VPolytopeInstance, map_fn: Callable = map) -> Fraction:
    """Sum of ``|det M_U| / n!`` over facet subsets.

    ``map_fn`` may be swapped for a parallel map (e.g. ``Pool.map``); the
    work items are independent.
    """
    total = sum((hit[1] for _, hit in _scan(inst, map_fn)), Fraction(0))
    return total / math.factorial(inst.n)
