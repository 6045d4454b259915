"""Deterministic (1+delta)-approximation of vol(C(0,1) & C(c,r)).

The volume equals an n-fold convolution of indicator functions.  Each stage
integrates the previous stage's staircase function along the piecewise linear
path ``s -> (u - |s|, v - |s - c_i|)`` and re-staircases the result on the grid
``{(k/M, r l/M)}``.  Staircase cells are left-open/right-closed, so a table
entry at index ``(k, l)`` stands for the whole cell ``((k-1)/M, k/M] x ...``.

Positions along the integration variable ``s`` are kept as integers in units of
``1/D`` (``D = 2 M lcm(den r, den c_i)``) so every ceiling is exact; table values
are float64.

Two evaluation strategies compute the same ``G_n(1, r)``:

``dense``
    every stage over the full ``(M+1)^2`` grid, ``O(n M^3)``.
``sparse``
    the last two stages only at the cells they actually read; stage 1 has a
    closed form.  ``O(M^2)`` for ``n <= 3``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exceptions import InvalidInstance, PreconditionViolation
from .geometry import Vector, as_fraction, as_vector, l1_norm

_INT64_SAFE = 1 << 62


@dataclass(frozen=True)
class TwoBallInstance:
    """Canonical pair ``C(0,1)`` and ``C(c, r)`` with ``c >= 0``, ``||c||_1 <= r <= 1``."""

    c: Vector
    r: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", as_vector(self.c))
        object.__setattr__(self, "r", as_fraction(self.r))
        if not 0 < self.r <= 1:
            raise InvalidInstance(f"radius must lie in (0, 1], got {self.r}")
        if any(x < 0 for x in self.c):
            raise InvalidInstance("centre must be componentwise nonnegative")
        if l1_norm(self.c) > self.r:
            raise PreconditionViolation(
                f"||c||_1 = {l1_norm(self.c)} exceeds r = {self.r}; centres must be mutually contained")

    @property
    def n(self) -> int:
        return len(self.c)


@dataclass(frozen=True)
class ApproxResult:
    """Output of an approximation engine.

    ``lower_exact`` marks a one-sided guarantee ``vol <= value <= (1+delta) vol``;
    otherwise the guarantee is ``(1-delta) vol <= value <= (1+delta) vol``.
    """

    value: float
    delta: Fraction
    M: int
    lower_exact: bool
    engine: str
    params: dict = field(default_factory=dict)

    @property
    def upper_factor(self) -> Fraction:
        return 1 + self.delta

    @property
    def bracket(self) -> tuple[float, float]:
        """Interval guaranteed to contain the true volume (exact arithmetic)."""
        if self.lower_exact:
            return self.value / float(1 + self.delta), self.value
        return self.value / float(1 + self.delta), self.value / float(1 - self.delta)


@dataclass
class StaircaseTable:
    """Stage ``stage`` values on the grid: ``values[k, l] = G(k/M, r l/M)``."""

    M: int
    r: Fraction
    values: np.ndarray
    stage: int = 0

    @classmethod
    def initial(cls, M: int, r) -> "StaircaseTable":
        return cls(M, as_fraction(r), np.ones((M + 1, M + 1)), 0)

    def is_monotone(self, atol: float = 1e-12) -> bool:
        v = self.values
        return bool((np.diff(v, axis=0) >= -atol).all() and (np.diff(v, axis=1) >= -atol).all())


def grid_size(n: int, delta) -> int:
    """``M = ceil(4 n^2 / delta)``."""
    delta = as_fraction(delta)
    return math.ceil(4 * n * n / delta)


class _Stage:
    """Integer geometry of one coordinate: ``s = S/D``, centre ``c = C/D``."""

    def __init__(self, M: int, r: Fraction, c: Fraction):
        self.M = M
        self.r = r
        L = math.lcm(r.denominator, c.denominator)
        self.D = 2 * M * L
        self.xstep = 2 * L                                  # 1/M in units of 1/D
        self.ystep = r.numerator * (2 * L // r.denominator)  # r/M in units of 1/D
        self.C = c.numerator * (self.D // c.denominator)
        self.rnum, self.rden = r.numerator, r.denominator
        bound = M * (self.rnum + 2 * self.rden) * 2 * self.D
        self.dtype = np.int64 if bound < _INT64_SAFE else object

    def arange(self, lo: int, hi: int) -> np.ndarray:
        return np.arange(lo, hi, dtype=np.int64).astype(self.dtype)

    def xindex(self, k, S):
        """``ceil(M (k/M - |s|))`` for interior points ``s``."""
        return k - (self.M * np.abs(S)) // self.D

    def yindex(self, l, S):
        """``ceil((M/r)(r l/M - |s - c|))`` for interior points ``s``."""
        return l - (self.M * self.rden * np.abs(S - self.C)) // (self.rnum * self.D)

    def breakpoints(self, k: int, l: int) -> np.ndarray:
        D, C = self.D, self.C
        m = self.arange(-k, k + 1)
        xs = m * self.xstep
        q = self.arange(-l, l + 1)
        ys = C + q * self.ystep
        fixed = np.array([-D, 0, C, D], dtype=np.int64).astype(self.dtype)
        pts = np.concatenate([xs, ys, fixed])
        pts = pts[(pts >= -D) & (pts <= D)]
        return np.unique(pts)


def breakpoints(u, v, c_i, M: int, r) -> list[Fraction]:
    """Sorted points of ``[-1, 1]`` where the integrand of a stage can change.

    These are the ``s`` with ``u - |s|`` or ``v - |s - c_i|`` on a grid level,
    together with ``-1, 0, c_i, 1``.  ``u`` must be a multiple of ``1/M`` in
    ``[0, 1]`` and ``v`` a multiple of ``r/M`` in ``[0, r]``.
    """
    u, v, c_i, r = map(as_fraction, (u, v, c_i, r))
    if not 0 < r <= 1:
        raise InvalidInstance("r must lie in (0, 1]")
    if not 0 <= c_i <= 1:
        raise InvalidInstance("c_i must lie in [0, 1]")
    k, l = u * M, v * M / r
    if k.denominator != 1 or l.denominator != 1 or not (0 <= k <= M and 0 <= l <= M):
        raise InvalidInstance(f"({u}, {v}) is not a grid point")
    st = _Stage(M, r, c_i)
    return [Fraction(int(x), st.D) for x in st.breakpoints(int(k), int(l))]


def _with_zero_border(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Readable table ``F`` (index 0 reads 0, one padding column) and its row prefix sums."""
    M = values.shape[0] - 1
    F = np.zeros((M + 1, M + 2))
    F[1:, 1:M + 1] = values[1:, 1:]
    return F, np.cumsum(F, axis=1)


def _rows(F: np.ndarray, P: np.ndarray, st: _Stage, k: int, ls: np.ndarray) -> np.ndarray:
    """Stage values at ``(k, l)`` for every ``l`` in ``ls``.

    The x-index is constant on each cell between consecutive multiples of
    ``1/M`` (split at ``c``), and along a cell the y-coordinate moves with
    unit speed, so each cell integrates to a difference of the row's
    piecewise-linear prefix integral.
    """
    if k == 0:
        return np.zeros(len(ls))
    E = st.arange(-k, k + 1) * st.xstep
    if -k * st.xstep < st.C < k * st.xstep and st.C % st.xstep:
        E = np.sort(np.append(E, st.C))
    mids = (E[:-1] + E[1:]) // 2
    xi = np.asarray(st.xindex(k, mids), dtype=np.int64)

    shift, frac = _level_offsets(st.M * st.rden * np.abs(E - st.C), st.rnum * st.D)
    return _cell_sums(F, P, xi, ls, shift, frac) * (float(st.r) / st.M)


def _level_offsets(w_num, w_den: int):
    """``(ceil(w), ceil(w) - w)`` for ``w = w_num / w_den >= 0``, exactly.

    ``l - w`` then has floor ``l - ceil(w)`` and fractional part ``ceil(w) - w``;
    ``w`` depends only on the breakpoint, so the division happens once per column.
    """
    q, rem = np.divmod(w_num, w_den)
    up = np.asarray(rem != 0)
    shift = np.asarray(q, dtype=np.int64) + up
    frac = np.where(up, 1.0 - np.asarray(rem, dtype=float) / float(w_den), 0.0)
    return shift, frac


_BLOCK = 1 << 13


def _cell_sums(F: np.ndarray, P: np.ndarray, rows: np.ndarray, ls: np.ndarray,
               shift: np.ndarray, frac: np.ndarray) -> np.ndarray:
    """``sum_j |Phi_j(y_{j+1}) - Phi_j(y_j)|`` for each query level ``l``.

    ``Phi_j`` is the prefix integral of table row ``rows[j]`` and
    ``y = l - w`` at each breakpoint; negative positions read 0.  Queries are
    processed in blocks so the temporaries stay cache-sized.
    """
    width = F.shape[1]
    Pf, Ff = P.ravel(), F.ravel()
    ls = np.asarray(ls, dtype=np.int64)
    base = rows * width
    out = np.empty(len(ls))
    step = max(1, _BLOCK // max(len(shift), 1))
    for lo in range(0, len(ls), step):
        fl = ls[lo:lo + step, None] - shift[None, :]
        neg = fl < 0
        col = np.where(neg, 0, fl)
        fr = np.where(neg, 0.0, frac[None, :])
        a = col[:, :-1] + base
        b = col[:, 1:] + base
        va = Pf.take(a) + fr[:, :-1] * Ff.take(a + 1)
        vb = Pf.take(b) + fr[:, 1:] * Ff.take(b + 1)
        out[lo:lo + step] = np.abs(vb - va).sum(axis=1)
    return out


def dp_stage(prev: StaircaseTable, c_i, threads: int = 1) -> StaircaseTable:
    """Next staircase table from ``prev`` for a coordinate with centre ``c_i``.

    Row and column 0 of the result are 0: the function vanishes for
    ``u <= 0`` or ``v <= 0`` once at least one coordinate has been integrated.
    Rows are independent; ``threads > 1`` maps them over a thread pool, which
    does not change the per-entry summation order.
    """
    c_i = as_fraction(c_i)
    if not 0 <= c_i <= 1:
        raise InvalidInstance("c_i must lie in [0, 1]")
    M = prev.M
    st = _Stage(M, prev.r, c_i)
    F, P = _with_zero_border(prev.values)
    ls = np.arange(M + 1)
    out = np.zeros((M + 1, M + 1))

    def row(k):
        out[k] = _rows(F, P, st, k, ls)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(row, range(1, M + 1)))
    else:
        for k in range(1, M + 1):
            row(k)
    return StaircaseTable(M, prev.r, out, prev.stage + 1)


def _first_stage(st: _Stage, k, l) -> np.ndarray:
    """Stage-1 values in closed form: length of ``[-k/M, k/M] & [c - r l/M, c + r l/M]``."""
    k = np.asarray(k)
    l = np.asarray(l)
    lo = np.maximum(-k * st.xstep, st.C - l * st.ystep)
    hi = np.minimum(k * st.xstep, st.C + l * st.ystep)
    out = np.maximum(hi - lo, 0).astype(float) / st.D
    return np.where((k >= 1) & (l >= 1), out, 0.0)


def first_stage_table(M: int, r, c_1) -> StaircaseTable:
    st = _Stage(M, as_fraction(r), as_fraction(c_1))
    out = np.empty((M + 1, M + 1))
    l = np.arange(M + 1)
    for k in range(M + 1):
        out[k] = _first_stage(st, k, l)
    return StaircaseTable(M, st.r, out, 1)


def _point_cells(st: _Stage, k: int, l: int):
    """Segment lengths and the prev-table cells they read for grid point ``(k, l)``."""
    t = st.breakpoints(k, l)
    mids = (t[:-1] + t[1:]) // 2
    lengths = np.asarray(np.diff(t), dtype=float) / st.D
    xi = np.asarray(st.xindex(k, mids), dtype=np.int64)
    yi = np.asarray(st.yindex(l, mids), dtype=np.int64)
    live = (xi >= 1) & (yi >= 1)
    return lengths[live], xi[live], yi[live]


def _eval_points(prev_F, prev_P, st: _Stage, ks: np.ndarray, ls: np.ndarray) -> np.ndarray:
    out = np.empty(len(ks))
    order = np.argsort(ks, kind="stable")
    ks_sorted = ks[order]
    starts = np.flatnonzero(np.r_[True, ks_sorted[1:] != ks_sorted[:-1]])
    bounds = np.r_[starts, len(ks)]
    for a, b in zip(bounds[:-1], bounds[1:]):
        idx = order[a:b]
        out[idx] = _rows(prev_F, prev_P, st, int(ks_sorted[a]), ls[idx])
    return out


def _sparse_volume(c: Sequence[Fraction], r: Fraction, M: int, threads: int = 1) -> float:
    n = len(c)
    if n == 1:
        return float(_first_stage(_Stage(M, r, c[0]), M, M))
    # Dense through stage n-2, closed form for stage 1.
    table = None
    if n >= 3:
        table = first_stage_table(M, r, c[0])
        for i in range(1, n - 2):
            table = dp_stage(table, c[i], threads=threads)
    last = _Stage(M, r, c[n - 1])
    lengths, xi, yi = _point_cells(last, M, M)
    st = _Stage(M, r, c[n - 2])
    if n == 2:
        vals = _first_stage(st, xi, yi)
    else:
        F, P = _with_zero_border(table.values)
        cells, inverse = np.unique(np.stack([xi, yi]), axis=1, return_inverse=True)
        vals = _eval_points(F, P, st, cells[0], cells[1])[inverse.ravel()]
    return float(np.dot(lengths, vals))


def _dense_volume(c, r, M, threads=1, keep_tables=False):
    table = StaircaseTable.initial(M, r)
    tables = [table]
    for ci in c:
        table = dp_stage(table, ci, threads=threads)
        if keep_tables:
            tables.append(table)
    return float(table.values[M, M]), tables


def approx_two_ball_volume(inst: TwoBallInstance, delta, *, M: int | None = None,
                           strategy: str = "sparse", threads: int = 1) -> ApproxResult:
    """``Z`` with ``vol(C(0,1) & C(c,r)) <= Z <= (1+delta) vol``.

    ``M`` defaults to ``ceil(4 n^2 / delta)``; passing a larger ``M`` keeps the
    guarantee, a smaller one voids it.
    """
    delta = as_fraction(delta)
    if not 0 < delta < 1:
        raise InvalidInstance(f"delta must lie in (0, 1), got {delta}")
    needed = grid_size(inst.n, delta)
    if M is None:
        M = needed
    if M < 1:
        raise InvalidInstance("M must be positive")
    if strategy == "dense":
        value, _ = _dense_volume(inst.c, inst.r, M, threads)
    elif strategy == "sparse":
        value = _sparse_volume(inst.c, inst.r, M, threads)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return ApproxResult(value, delta, M, True, "two_ball",
                        {"M": M, "delta": delta, "strategy": strategy,
                         "guaranteed": M >= needed})
