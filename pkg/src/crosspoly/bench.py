"""Timing harness for the two-ball engine.

Instances come from a seeded generator so a config file fully determines
the work done.  Rows keep the order of the config.
"""
from __future__ import annotations

import time
from fractions import Fraction

import numpy as np

from .exceptions import InvalidInstance
from .geometry import as_fraction
from .two_ball import TwoBallInstance, approx_two_ball_volume, grid_size


def random_two_ball_instance(n: int, rng: np.random.Generator, denom: int = 20) -> TwoBallInstance:
    """Rational ``C(c, r)`` with ``||c||_1 <= r``; denominators stay small."""
    r = Fraction(int(rng.integers(1, denom + 1)), denom)
    w = rng.integers(0, denom + 1, size=n)
    slack = int(rng.integers(0, denom + 1))
    total = int(w.sum()) + slack
    if total == 0:
        return TwoBallInstance((Fraction(0),) * n, r)
    return TwoBallInstance(tuple(r * int(x) / total for x in w), r)


def _rows(config):
    if isinstance(config, dict):
        seed = config.get("seed", 0)
        rows = config.get("rows", [])
    else:
        seed, rows = 0, config
    if not isinstance(rows, list):
        raise InvalidInstance("bench config must be a list of rows or {'rows': [...]}")
    return int(seed), rows


def run_bench(config, threads: int = 1) -> list[dict]:
    """Time ``approx_two_ball_volume`` (dense tables) for each ``{n, delta}`` or ``{n, M}`` row."""
    seed, rows = _rows(config)
    out = []
    for i, row in enumerate(rows):
        try:
            n = int(row["n"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInstance(f"bench row {i} needs an integer 'n'") from exc
        if n < 1:
            raise InvalidInstance("n must be >= 1")
        delta = as_fraction(row.get("delta", Fraction(1, 2)))
        if not 0 < delta < 1:
            raise InvalidInstance(f"delta must lie in (0, 1), got {delta}")
        M = int(row["M"]) if "M" in row else grid_size(n, delta)
        inst = random_two_ball_instance(n, np.random.default_rng([seed, i]))
        t0 = time.perf_counter()
        approx_two_ball_volume(inst, delta, M=M, strategy="dense", threads=threads)
        ms = round((time.perf_counter() - t0) * 1000)
        out.append({"n": n, "delta": delta, "M": M, "wall_time_ms": ms})
    return out
