"""Volume computation for intersections of L1-balls and related polytopes.

Engines:

* :func:`approx_two_ball_volume` -- (1+delta) upper approximation of ``C(0,1) & C(c,r)``
* :func:`approx_knapsack_dual_volume` -- (1 +- eps) approximation of ``conv{+-e_i, a}``
* :func:`approx_k_ball_volume` -- k mutually containing balls, k <= 4
* :func:`exact_volume` -- exact volume of a V-polytope with few extra vertices

plus exact and Monte Carlo oracles in :mod:`crosspoly.oracles`.
"""
from .exceptions import (DegenerateInput, InternalInconsistency, InvalidInstance,
                         OriginNotInterior, PreconditionViolation, VolumeError)
from .geometry import CrossPolytope, contains, cross_polytope_volume, normalize_pair
from .k_ball import KBallInstance, approx_k_ball_volume, k_breakpoints, k_dp_stage
from .knapsack import KnapsackDualInstance, approx_knapsack_dual_volume
from .oracles import (count_large_sets, exact_hull_volume, exact_intersection_volume,
                      hardness_reduction_check, mc_volume)
from .two_ball import (ApproxResult, StaircaseTable, TwoBallInstance, approx_two_ball_volume,
                       breakpoints, dp_stage)
from .vpolytope import VPolytopeInstance, exact_volume, facet_test, facets

__version__ = "0.1.0"

__all__ = [
    "ApproxResult", "CrossPolytope", "DegenerateInput", "InternalInconsistency",
    "InvalidInstance", "KBallInstance", "KnapsackDualInstance", "OriginNotInterior",
    "PreconditionViolation", "StaircaseTable", "TwoBallInstance", "VPolytopeInstance",
    "VolumeError", "approx_k_ball_volume", "approx_knapsack_dual_volume",
    "approx_two_ball_volume", "breakpoints", "contains", "count_large_sets",
    "cross_polytope_volume", "dp_stage", "exact_hull_volume", "exact_intersection_volume",
    "exact_volume", "facet_test", "facets", "hardness_reduction_check", "k_breakpoints",
    "k_dp_stage", "mc_volume", "normalize_pair",
]
