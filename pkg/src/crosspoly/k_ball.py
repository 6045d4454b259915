"""(1+delta)-approximation of the volume of an intersection of k L1-balls.

Same staircase-convolution scheme as :mod:`crosspoly.two_ball`, with a
``k``-dimensional table: axis ``i`` tracks the remaining L1 budget of ball
``i`` on the grid ``l_i r_i / M``.  Dense tables cost ``(M+1)^k`` floats, so
``k`` is capped at 4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from .exceptions import InvalidInstance, PreconditionViolation
from .geometry import Vector, as_fraction, as_vector, l1_norm
from .two_ball import ApproxResult, _cell_sums, _level_offsets

MAX_BALLS = 4
_INT64_SAFE = 1 << 62


@dataclass(frozen=True)
class KBallInstance:
    """Balls ``C(p_i, r_i)``, translated on ingestion so that ``p_1 = 0``.

    Every centre must lie strictly inside every other ball.
    """

    centers: tuple[Vector, ...]
    radii: tuple[Fraction, ...]

    def __post_init__(self):
        try:
            centers = [as_vector(p) for p in self.centers]
            radii = tuple(as_fraction(r) for r in self.radii)
        except TypeError as exc:
            raise InvalidInstance("malformed centres/radii") from exc
        k = len(centers)
        if k == 0 or k != len(radii):
            raise InvalidInstance("need one radius per centre and at least one ball")
        if k > MAX_BALLS:
            raise InvalidInstance(f"k = {k} exceeds the supported maximum {MAX_BALLS}")
        n = len(centers[0])
        if any(len(p) != n for p in centers):
            raise InvalidInstance("centres of mixed dimension")
        if any(not 0 < r <= 1 for r in radii):
            raise InvalidInstance("radii must lie in (0, 1]")
        p1 = centers[0]
        centers = tuple(tuple(a - b for a, b in zip(p, p1)) for p in centers)
        for i, j in product(range(k), repeat=2):
            if i != j and not l1_norm(a - b for a, b in zip(centers[i], centers[j])) < radii[j]:
                raise PreconditionViolation(
                    f"centre {i} is not strictly inside ball {j}")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)

    @property
    def k(self) -> int:
        return len(self.radii)

    @property
    def n(self) -> int:
        return len(self.centers[0])

    def column(self, j: int) -> tuple[Fraction, ...]:
        """Coordinate ``j`` of every centre."""
        return tuple(p[j] for p in self.centers)


@dataclass
class KStaircaseTable:
    M: int
    radii: tuple[Fraction, ...]
    values: np.ndarray
    stage: int = 0

    @classmethod
    def initial(cls, M: int, radii) -> "KStaircaseTable":
        radii = tuple(as_fraction(r) for r in radii)
        return cls(M, radii, np.ones((M + 1,) * len(radii)), 0)

    def is_monotone(self, atol: float = 1e-12) -> bool:
        return all((np.diff(self.values, axis=a) >= -atol).all() for a in range(self.values.ndim))


def grid_size(k: int, n: int, delta) -> int:
    """``M = ceil(2 k n^2 / delta)``."""
    return math.ceil(2 * k * n * n / as_fraction(delta))


class _KStage:
    """Integer geometry for one coordinate: positions ``S/D``, centres ``P_i/D``."""

    def __init__(self, M: int, radii: Sequence[Fraction], column: Sequence[Fraction]):
        self.M = M
        self.k = len(radii)
        L = math.lcm(*(r.denominator for r in radii), *(p.denominator for p in column))
        self.D = D = 2 * M * L
        self.rnum = [r.numerator for r in radii]
        self.rden = [r.denominator for r in radii]
        self.rf = [float(r) for r in radii]
        self.step = [r.numerator * (2 * L // r.denominator) for r in radii]
        self.P = [p.numerator * (D // p.denominator) for p in column]
        bound = M * (max(self.rnum) + 2 * max(self.rden)) * 4 * D
        self.dtype = np.int64 if bound < _INT64_SAFE else object

    def arange(self, lo, hi):
        return np.arange(lo, hi, dtype=np.int64).astype(self.dtype)

    def index(self, i: int, l, S):
        """``ceil((M / r_i)(l r_i / M - |s - p_i|))`` at interior points."""
        return l - (self.M * self.rden[i] * np.abs(S - self.P[i])) // (self.rnum[i] * self.D)

    def breakpoints(self, ls: Sequence[int]) -> np.ndarray:
        parts = [np.array([-self.D, self.D], dtype=np.int64).astype(self.dtype)]
        for i, l in enumerate(ls):
            parts.append(self.P[i] + self.arange(-l, l + 1) * self.step[i])
        pts = np.concatenate(parts)
        return np.unique(pts[(pts >= -self.D) & (pts <= self.D)])

    def first_stage(self, W: np.ndarray) -> np.ndarray:
        """Closed-form stage-1 values at index rows ``W`` (shape ``(N, k)``)."""
        W = np.asarray(W)
        lo = np.full(len(W), -self.D, dtype=object if self.dtype is object else np.int64)
        hi = np.full(len(W), self.D, dtype=lo.dtype)
        for i in range(self.k):
            lo = np.maximum(lo, self.P[i] - W[:, i] * self.step[i])
            hi = np.minimum(hi, self.P[i] + W[:, i] * self.step[i])
        out = np.asarray(np.maximum(hi - lo, 0), dtype=float) / self.D
        return np.where((W >= 1).all(axis=1), out, 0.0)


def k_breakpoints(u: Sequence, j: int, inst: KBallInstance, M: int) -> list[Fraction]:
    """Points of ``[-1, 1]`` where some ``u_i - |s - p_ij|`` hits a level ``l r_i / M``.

    Also includes ``+-1`` and every kink ``p_ij``.
    """
    u = [as_fraction(x) for x in u]
    if len(u) != inst.k:
        raise InvalidInstance("grid vector has the wrong length")
    ls = []
    for x, r in zip(u, inst.radii):
        l = x * M / r
        if l.denominator != 1 or not 0 <= l <= M:
            raise InvalidInstance(f"{x} is not on the grid of radius {r}")
        ls.append(int(l))
    st = _KStage(M, inst.radii, inst.column(j))
    return [Fraction(int(x), st.D) for x in st.breakpoints(ls)]


def _readable(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flattened table with zero index-0 borders plus a padding column, and its prefix sums."""
    M = values.shape[0] - 1
    k = values.ndim
    F = np.zeros((M + 1,) * (k - 1) + (M + 2,))
    inner = (slice(1, None),) * (k - 1)
    F[inner + (slice(1, M + 1),)] = values[inner + (slice(1, None),)]
    F = F.reshape(-1, M + 2)
    return F, np.cumsum(F, axis=1)


def _group(F, P, st: _KStage, lead: Sequence[int], ls: np.ndarray) -> np.ndarray:
    """Stage values at ``lead + (l,)`` for each ``l`` in ``ls``.

    Cells are delimited by the breakpoints of the leading axes (and the kink
    of the last one); the last axis moves with unit speed along a cell, so
    its contribution is a difference of the prefix integral of one table row.
    """
    zeros = np.zeros(len(ls))
    if any(l == 0 for l in lead):
        return zeros
    k, D, M = st.k, st.D, st.M
    lo, hi = -D, D
    for i, l in enumerate(lead):
        lo = max(lo, st.P[i] - l * st.step[i])
        hi = min(hi, st.P[i] + l * st.step[i])
    if lo >= hi:
        return zeros
    parts = [np.array([lo, hi, st.P[k - 1]], dtype=np.int64).astype(st.dtype)]
    for i, l in enumerate(lead):
        parts.append(st.P[i] + st.arange(-l, l + 1) * st.step[i])
    E = np.concatenate(parts)
    E = np.unique(E[(E >= lo) & (E <= hi)])
    mids = (E[:-1] + E[1:]) // 2
    row = np.zeros(len(mids), dtype=np.int64)
    for i, l in enumerate(lead):
        row = row * (M + 1) + np.asarray(st.index(i, l, mids), dtype=np.int64)

    last = k - 1
    shift, frac = _level_offsets(M * st.rden[last] * np.abs(E - st.P[last]), st.rnum[last] * D)
    return _cell_sums(F, P, row, ls, shift, frac) * (st.rf[last] / M)


def k_dp_stage(prev: KStaircaseTable, j: int, inst: KBallInstance) -> KStaircaseTable:
    """Stage table for coordinate ``j`` over the full ``(M+1)^k`` grid."""
    M, k = prev.M, len(prev.radii)
    if k != inst.k:
        raise InvalidInstance("table and instance disagree on k")
    st = _KStage(M, prev.radii, inst.column(j))
    F, P = _readable(prev.values)
    ls = np.arange(M + 1)
    out = np.zeros((M + 1,) * k)
    for lead in product(range(M + 1), repeat=k - 1):
        out[lead] = _group(F, P, st, lead, ls)
    return KStaircaseTable(M, prev.radii, out, prev.stage + 1)


def first_stage_table(M: int, inst: KBallInstance) -> KStaircaseTable:
    st = _KStage(M, inst.radii, inst.column(0))
    grid = np.stack(np.meshgrid(*[np.arange(M + 1)] * inst.k, indexing="ij"), axis=-1)
    vals = st.first_stage(grid.reshape(-1, inst.k)).reshape((M + 1,) * inst.k)
    return KStaircaseTable(M, inst.radii, vals, 1)


def _eval_points(F, P, st: _KStage, W: np.ndarray) -> np.ndarray:
    """Stage values at the index rows of ``W``, grouped by their leading indices."""
    out = np.empty(len(W))
    lead = W[:, :-1]
    keys, inverse = np.unique(lead, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(inverse, kind="stable")
    bounds = np.searchsorted(inverse[order], np.arange(len(keys) + 1))
    for g, key in enumerate(keys):
        idx = order[bounds[g]:bounds[g + 1]]
        out[idx] = _group(F, P, st, tuple(int(x) for x in key), W[idx, -1])
    return out


def _sparse_volume(inst: KBallInstance, M: int) -> float:
    n, k = inst.n, inst.k
    top = np.full((1, k), M)
    if n == 1:
        return float(_KStage(M, inst.radii, inst.column(0)).first_stage(top)[0])
    table = None
    if n >= 3:
        table = first_stage_table(M, inst)
        for j in range(1, n - 2):
            table = k_dp_stage(table, j, inst)
    last = _KStage(M, inst.radii, inst.column(n - 1))
    t = last.breakpoints([M] * k)
    mids = (t[:-1] + t[1:]) // 2
    lengths = np.asarray(np.diff(t), dtype=float) / last.D
    W = np.stack([np.asarray(last.index(i, M, mids), dtype=np.int64) for i in range(k)], axis=1)
    live = (W >= 1).all(axis=1)
    lengths, W = lengths[live], W[live]
    st = _KStage(M, inst.radii, inst.column(n - 2))
    if n == 2:
        vals = st.first_stage(W)
    else:
        F, P = _readable(table.values)
        cells, inverse = np.unique(W, axis=0, return_inverse=True)
        vals = _eval_points(F, P, st, cells)[inverse.ravel()]
    return float(np.dot(lengths, vals))


def _dense_volume(inst: KBallInstance, M: int) -> float:
    table = KStaircaseTable.initial(M, inst.radii)
    for j in range(inst.n):
        table = k_dp_stage(table, j, inst)
    return float(table.values[(M,) * inst.k])


def approx_k_ball_volume(inst: KBallInstance, delta, *, M: int | None = None,
                         strategy: str = "sparse") -> ApproxResult:
    """``Z`` with ``vol <= Z <= (1+delta) vol`` for ``0 < delta <= 1/2``."""
    delta = as_fraction(delta)
    if not 0 < delta <= Fraction(1, 2):
        raise InvalidInstance(f"delta must lie in (0, 1/2], got {delta}")
    needed = grid_size(inst.k, inst.n, delta)
    if M is None:
        M = needed
    if M < 1:
        raise InvalidInstance("M must be positive")
    if strategy == "dense":
        value = _dense_volume(inst, M)
    elif strategy == "sparse":
        value = _sparse_volume(inst, M)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return ApproxResult(value, delta, M, True, "k_ball",
                        {"M": M, "delta": delta, "strategy": strategy,
                         "guaranteed": M >= needed})
