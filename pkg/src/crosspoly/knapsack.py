"""(1 +- eps)-approximation of vol(conv{+-e_1, ..., +-e_n, a}).

The hull is squeezed between the union of the shrinking balls
``Q_k = C((1 - beta^k) a, beta^k)`` and the hull itself.  The union's volume
is a geometric series in ``beta^n`` whose only unknown is
``vol(Q_0 & Q_1)``, which the two-ball engine approximates from above.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exceptions import InvalidInstance
from .geometry import CrossPolytope, as_fraction, cross_polytope_volume
from .two_ball import ApproxResult, TwoBallInstance, approx_two_ball_volume


@dataclass(frozen=True)
class KnapsackDualInstance:
    """Positive integer vector ``a``, stored sorted non-increasing."""

    a: tuple[int, ...]

    def __post_init__(self):
        vals = []
        for x in self.a:
            f = as_fraction(x)
            if f.denominator != 1 or f < 1:
                raise InvalidInstance(f"entries of a must be positive integers, got {x!r}")
            vals.append(f.numerator)
        if not vals:
            raise InvalidInstance("a must be non-empty")
        object.__setattr__(self, "a", tuple(sorted(vals, reverse=True)))

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def norm1(self) -> int:
        return sum(self.a)

    def vertices(self) -> list[tuple[int, ...]]:
        """``+-e_i`` and ``a``; their hull is the polytope being measured."""
        out = []
        for i in range(self.n):
            for s in (1, -1):
                e = [0] * self.n
                e[i] = s
                out.append(tuple(e))
        out.append(self.a)
        return out


@dataclass(frozen=True)
class KnapsackRunParams:
    epsilon: Fraction
    beta: Fraction
    inner_delta: Fraction


def build_params(inst: KnapsackDualInstance, epsilon) -> KnapsackRunParams:
    """Shrink factor and inner tolerance for accuracy ``epsilon`` (clamped to 1/2)."""
    eps = as_fraction(epsilon)
    if eps <= 0:
        raise InvalidInstance(f"epsilon must be positive, got {eps}")
    eps = min(eps, Fraction(1, 2))
    n = inst.n
    beta = 1 - eps / (2 * n * inst.norm1)
    return KnapsackRunParams(eps, beta, eps * eps / (4 * n))


def q1_instance(inst: KnapsackDualInstance, params: KnapsackRunParams) -> TwoBallInstance:
    """The first shrunken ball ``C((1 - beta) a, beta)`` paired with ``C(0, 1)``."""
    shift = 1 - params.beta
    return TwoBallInstance(tuple(shift * x for x in inst.a), params.beta)


def q_ball(inst: KnapsackDualInstance, params: KnapsackRunParams, k: int) -> CrossPolytope:
    bk = params.beta**k
    return CrossPolytope(tuple((1 - bk) * x for x in inst.a), bk)


def union_volume(inst: KnapsackDualInstance, params: KnapsackRunParams, intersection):
    """Volume of ``Q_0 | Q_1 | ...`` given ``vol(Q_0 & Q_1)``.

    Exact when ``intersection`` is a ``Fraction``; ``1 - beta^n`` is always formed
    in rationals so the near-cancellation never happens in floating point.
    """
    n = inst.n
    shrink = 1 - params.beta**n
    if isinstance(intersection, Fraction):
        return (cross_polytope_volume(n) - intersection) / shrink
    return (float(cross_polytope_volume(n)) - intersection) / float(shrink)


def approx_knapsack_dual_volume(inst: KnapsackDualInstance, epsilon, *,
                                strategy: str = "sparse", threads: int = 1) -> ApproxResult:
    params = build_params(inst, epsilon)
    inner = approx_two_ball_volume(q1_instance(inst, params), params.inner_delta,
                                   strategy=strategy, threads=threads)
    n = inst.n
    gap = float(cross_polytope_volume(n)) - inner.value
    if not gap > 0:
        raise ArithmeticError(f"non-positive gap 2^n/n! - Z = {gap}")
    value = float(1 + params.epsilon) * gap / float(1 - params.beta**n)
    return ApproxResult(value, params.epsilon, inner.M, False, "knapsack_dual", {
        "M": inner.M, "beta": params.beta, "delta": params.inner_delta,
        "epsilon": params.epsilon, "inner_value": inner.value,
        "strategy": strategy})
