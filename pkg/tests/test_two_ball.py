from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crosspoly.exceptions import InvalidInstance, PreconditionViolation
from crosspoly.geometry import CrossPolytope, cross_polytope_volume
from crosspoly.oracles import box_clipped_intersection_volume, exact_intersection_volume
from crosspoly.two_ball import (StaircaseTable, TwoBallInstance, approx_two_ball_volume,
                                breakpoints, dp_stage, first_stage_table, grid_size)
from strategies import two_ball_instances

F = Fraction


def oracle(c, r):
    n = len(c)
    return exact_intersection_volume([CrossPolytope((0,) * n, 1), CrossPolytope(c, r)])


class TestInstance:
    def test_radius_range(self):
        for r in (0, F(-1, 2), F(3, 2)):
            with pytest.raises(InvalidInstance):
                TwoBallInstance((0,), r)

    def test_negative_centre(self):
        with pytest.raises(InvalidInstance):
            TwoBallInstance((F(-1, 10), 0), F(1, 2))

    def test_centres_not_contained(self):
        with pytest.raises(PreconditionViolation):
            TwoBallInstance((F(3, 10), F(3, 10)), F(1, 2))

    def test_boundary_allowed(self):
        assert TwoBallInstance((F(1, 4), F(1, 4)), F(1, 2)).n == 2


class TestBreakpoints:
    def test_examples(self):
        assert breakpoints(1, 1, 0, 1, 1) == [-1, 0, 1]
        assert {-1, 0, 1} <= set(breakpoints(0, 0, 1, 2, 1))

    @settings(max_examples=40)
    @given(st.integers(1, 6), st.data())
    def test_sorted_inside_unit_interval(self, M, data):
        k = data.draw(st.integers(0, M))
        l = data.draw(st.integers(0, M))
        r = F(data.draw(st.integers(1, 8)), 8)
        c = F(data.draw(st.integers(0, 8)), 8)
        pts = breakpoints(F(k, M), r * l / M, c, M, r)
        assert pts == sorted(set(pts))
        assert pts[0] == -1 and pts[-1] == 1
        assert {0, c} <= set(pts)
        assert len(pts) <= 4 * M + 8

    def test_off_grid(self):
        with pytest.raises(InvalidInstance):
            breakpoints(F(1, 3), 0, 0, 2, 1)
        with pytest.raises(InvalidInstance):
            breakpoints(0, F(1, 2), 0, 2, F(1, 3))

    def test_levels_constant_between_breakpoints(self):
        M, r, c = 4, F(3, 5), F(1, 5)
        u, v = F(3, 4), r * 2 / M
        pts = breakpoints(u, v, c, M, r)
        for a, b in zip(pts, pts[1:]):
            probes = [a + (b - a) * t / 7 for t in range(1, 7)]
            # Below level 0 every cell reads 0, so indices are clamped there.
            xs = {max(0, -((-M * (u - abs(s))) // 1)) for s in probes}
            ys = {max(0, -((-(M / r) * (v - abs(s - c))) // 1)) for s in probes}
            assert len(xs) == 1 and len(ys) == 1


class TestStage:
    def test_initial_table(self):
        t = StaircaseTable.initial(3, F(1, 2))
        assert t.values.shape == (4, 4) and (t.values == 1).all() and t.stage == 0

    def test_first_stage_examples(self):
        g = dp_stage(StaircaseTable.initial(5, 1), 0)
        assert g.values[5, 5] == pytest.approx(2.0, abs=1e-12)
        g = dp_stage(StaircaseTable.initial(1, 1), 1)
        assert g.values[1, 1] >= 1.0

    def test_zero_border_after_stage(self):
        g = dp_stage(StaircaseTable.initial(4, F(1, 2)), F(1, 10))
        assert (g.values[0] == 0).all() and (g.values[:, 0] == 0).all()

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 8), st.integers(1, 10), st.integers(0, 10))
    def test_stage_one_is_exact(self, M, rn, cn):
        # Starting from the all-ones table the staircase integral is exact.
        r, c = F(rn, 10), F(cn, 10)
        g = dp_stage(StaircaseTable.initial(M, r), c)
        closed = first_stage_table(M, r, c)
        np.testing.assert_allclose(g.values, closed.values, atol=1e-12)
        for k, l in [(M, M), (M // 2, M), (M, M // 2), (1, 1)]:
            psi = box_clipped_intersection_volume([(0,), (c,)], [F(k, M), r * l / M])
            assert g.values[k, l] == pytest.approx(float(psi), abs=1e-12)

    @settings(max_examples=15, deadline=None)
    @given(two_ball_instances(n=3), st.integers(2, 6))
    def test_monotone_every_stage(self, inst, M):
        c, r = inst
        t = StaircaseTable.initial(M, r)
        for ci in c:
            t = dp_stage(t, ci)
            assert t.is_monotone()
            assert (t.values >= 0).all()

    def test_threads_bit_identical(self):
        t0 = StaircaseTable.initial(12, F(2, 3))
        a = dp_stage(dp_stage(t0, F(1, 6)), F(1, 3))
        b = dp_stage(dp_stage(t0, F(1, 6), threads=3), F(1, 3), threads=3)
        assert np.array_equal(a.values, b.values)

    def test_sandwich_small(self):
        c, r, M = (F(1, 3), F(1, 7)), F(3, 4), 4
        t = StaircaseTable.initial(M, r)
        for i in (1, 2):
            t = dp_stage(t, c[i - 1])
            centres = [(0,) * i, c[:i]]
            for k in range(M + 1):
                for l in range(M + 1):
                    u, v = F(k, M), r * l / M
                    lo = box_clipped_intersection_volume(centres, [u, v])
                    hi = box_clipped_intersection_volume(centres, [u + F(i, M), v + r * i / M])
                    assert float(lo) - 1e-9 <= t.values[k, l] <= float(hi) + 1e-9


class TestApprox:
    def test_grid_size(self):
        assert grid_size(1, F(1, 10)) == 40
        assert grid_size(3, F(1, 2)) == 72

    def test_interval_example(self):
        res = approx_two_ball_volume(TwoBallInstance((F(3, 10),), F(1, 2)), F(1, 10))
        assert 1.0 <= res.value <= 1.1
        assert res.M == 40 and res.lower_exact and res.upper_factor == F(11, 10)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_concentric_unit_ball(self, n):
        res = approx_two_ball_volume(TwoBallInstance((0,) * n, 1), F(1, 5))
        v = float(cross_polytope_volume(n))
        assert v * (1 - 1e-9) <= res.value <= 1.2 * v * (1 + 1e-9)

    def test_planar_example(self):
        c, r = (F(1, 5), F(1, 5)), F(1, 2)
        v = float(oracle(c, r))
        z = approx_two_ball_volume(TwoBallInstance(c, r), F(1, 10)).value
        assert v * (1 - 1e-9) <= z <= 1.1 * v * (1 + 1e-9)

    @pytest.mark.parametrize("delta", [0, 1, F(3, 2), -1])
    def test_delta_range(self, delta):
        with pytest.raises(InvalidInstance):
            approx_two_ball_volume(TwoBallInstance((0,), 1), delta)

    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            approx_two_ball_volume(TwoBallInstance((0,), 1), F(1, 2), strategy="magic")

    @settings(max_examples=20, deadline=None)
    @given(two_ball_instances(), st.integers(2, 12))
    def test_sparse_matches_dense(self, inst, M):
        c, r = inst
        i = TwoBallInstance(c, r)
        dense = approx_two_ball_volume(i, F(1, 2), M=M, strategy="dense").value
        sparse = approx_two_ball_volume(i, F(1, 2), M=M, strategy="sparse").value
        assert sparse == pytest.approx(dense, rel=1e-12, abs=1e-15)

    @settings(max_examples=10, deadline=None)
    @given(two_ball_instances(n=2))
    def test_refining_grid_never_increases(self, inst):
        i = TwoBallInstance(*inst)
        zs = [approx_two_ball_volume(i, F(1, 2), M=M).value for M in (3, 6, 12, 24)]
        for coarse, fine in zip(zs, zs[1:]):
            assert fine <= coarse * (1 + 1e-9)

    @settings(max_examples=25, deadline=None)
    @given(two_ball_instances(n=2), st.sampled_from([F(1, 2), F(1, 5)]))
    def test_guarantee_planar(self, inst, delta):
        c, r = inst
        v = float(oracle(c, r))
        z = approx_two_ball_volume(TwoBallInstance(c, r), delta).value
        assert v <= z * (1 + 1e-9)
        assert z <= (1 + delta) * v * (1 + 1e-9)

    def test_bracket(self):
        res = approx_two_ball_volume(TwoBallInstance((F(3, 10),), F(1, 2)), F(1, 10))
        lo, hi = res.bracket
        assert lo <= 1.0 <= hi


def _naive_stage(prev, c, M, r):
    """Sum over breakpoint segments of length times the table cell read at the midpoint."""
    out = np.zeros_like(prev)
    for k in range(M + 1):
        for l in range(M + 1):
            u, v = F(k, M), r * l / M
            pts = breakpoints(u, v, c, M, r)
            total = 0.0
            for a, b in zip(pts, pts[1:]):
                s = (a + b) / 2
                x = -((-M * (u - abs(s))) // 1)
                y = -((-(M / r) * (v - abs(s - c))) // 1)
                if x >= 1 and y >= 1:
                    total += float(b - a) * prev[int(x), int(y)]
            out[k, l] = total
    return out


@settings(max_examples=10, deadline=None)
@given(two_ball_instances(n=2), st.integers(2, 6))
def test_stage_matches_naive_segment_sum(inst, M):
    c, r = inst
    t = StaircaseTable.initial(M, r)
    naive = t.values
    for ci in c:
        t = dp_stage(t, ci)
        naive = _naive_stage(naive, ci, M, r)
        np.testing.assert_allclose(t.values, naive, rtol=1e-12, atol=1e-14)
