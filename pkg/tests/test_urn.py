import itertools
import math

import numpy as np
import pytest

from erwalk import (
    Crossing,
    KgwUrn,
    LinearUrn,
    MajorityMemory,
    NotDifferentiableError,
    StepLimitUrn,
    UnsupportedUrnError,
    critical_params,
    fixed_points,
    majority_prob,
    majority_prob_slope,
    x_from_y,
    y_from_x,
)


def brute_majority(k, y):
    """Sum over all 2^k signed draw outcomes, weighted by y^#pos (1-y)^#neg."""
    total = 0.0
    for draws in itertools.product([1, 0], repeat=k):
        npos = sum(draws)
        if 2 * npos > k:
            total += y**npos * (1 - y) ** (k - npos)
    return total


class TestMajorityProb:
    def test_symmetric_point(self):
        assert majority_prob(3, 0.5) == pytest.approx(0.5, abs=1e-15)

    def test_certain(self):
        assert majority_prob(3, 1.0) == 1.0
        assert majority_prob(3, 0.0) == 0.0

    def test_cubic_value(self):
        # 3 y^2 - 2 y^3 at y = 0.2
        assert majority_prob(3, 0.2) == pytest.approx(0.104, abs=1e-12)

    @pytest.mark.parametrize("k", [1, 3, 5, 7])
    def test_matches_brute_force_enumeration(self, k):
        ys = np.linspace(0.0, 1.0, 101)
        got = majority_prob(k, ys)
        want = np.array([brute_majority(k, y) for y in ys])
        assert np.max(np.abs(got - want)) < 1e-12

    @pytest.mark.parametrize("k", [1, 3, 5, 7, 99])
    def test_mirror_symmetry_exact(self, k):
        ys = np.linspace(0.0, 1.0, 1000)
        s = majority_prob(k, ys) + majority_prob(k, 1.0 - ys)
        assert np.max(np.abs(s - 1.0)) < 1e-14

    def test_rejects_even_or_bad_k(self):
        for bad in (0, 2, 4, -3):
            with pytest.raises(ValueError):
                majority_prob(bad, 0.5)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            majority_prob(3, 1.2)

    def test_large_k_no_overflow(self):
        v = majority_prob(99, 0.6)
        assert 0.5 < v < 1.0 and np.isfinite(v)


class TestUrnValue:
    def test_linear_at_center(self):
        assert MajorityMemory(1, 0.75).value(0.5) == pytest.approx(0.5, abs=1e-15)

    def test_pure_majority(self):
        assert MajorityMemory(3, 1.0).value(0.2) == pytest.approx(0.104, abs=1e-12)

    def test_memoryless_constant(self):
        assert MajorityMemory(3, 0.5).value(0.9) == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("k,p", [(1, 0.75), (3, 0.9), (5, 0.8), (7, 0.65)])
    def test_value_symmetry(self, k, p):
        ys = np.linspace(0.0, 1.0, 1000)
        spec = MajorityMemory(k, p)
        assert np.max(np.abs(spec.value(ys) + spec.value(1.0 - ys) - 1.0)) < 1e-14

    @pytest.mark.parametrize("k,p", [(1, 0.6), (3, 0.85), (5, 0.95)])
    def test_center_is_fixed(self, k, p):
        assert abs(MajorityMemory(k, p).value(0.5) - 0.5) < 1e-14

    def test_step_limit_convention(self):
        step = StepLimitUrn(0.8)
        assert step.value(0.5) == 0.5
        assert step.value(0.7) == 0.8
        assert step.value(0.3) == pytest.approx(0.2)

    def test_kgw_shape(self):
        spec = KgwUrn(2.0)
        assert spec.value(0.5) == pytest.approx(0.5)
        assert spec.value(1.0) == pytest.approx(0.5 * (1 + math.tanh(2.0)))

    def test_construction_validation(self):
        with pytest.raises(ValueError):
            MajorityMemory(2, 0.7)
        with pytest.raises(ValueError):
            MajorityMemory(3, 1.2)
        with pytest.raises(ValueError):
            LinearUrn(0.8, 0.5)  # exceeds 1 at y = 1
        LinearUrn(0.25, 0.5)  # valid


class TestDerivative:
    def test_single_draw_constant_slope(self):
        for p in (0.6, 0.75, 0.9):
            spec = MajorityMemory(1, p)
            for y in (0.1, 0.5, 0.9):
                assert spec.derivative(y) == pytest.approx(2 * p - 1, abs=1e-15)

    def test_cubic_slope_at_destabilization(self):
        # 6 (2p-1) y (1-y) equals one at y = 1/2 when p = 5/6
        assert MajorityMemory(3, 5 / 6).derivative(0.5) == pytest.approx(1.0, abs=1e-12)

    def test_linear_constant(self):
        assert LinearUrn(0.3, 0.4).derivative(0.7) == pytest.approx(0.4)

    @pytest.mark.parametrize(
        "spec",
        [
            MajorityMemory(1, 0.7),
            MajorityMemory(3, 0.9),
            MajorityMemory(5, 0.8),
            LinearUrn(0.2, 0.6),
            KgwUrn(1.5),
        ],
    )
    def test_matches_central_differences(self, spec):
        ys = np.linspace(0.01, 0.99, 41)
        h = 1e-6
        fd = (np.asarray(spec.value(ys + h)) - np.asarray(spec.value(ys - h))) / (2 * h)
        assert np.max(np.abs(np.asarray(spec.derivative(ys)) - fd)) < 1e-6

    def test_step_jump_rejected(self):
        with pytest.raises(NotDifferentiableError):
            StepLimitUrn(0.8).derivative(0.5)
        assert StepLimitUrn(0.8).derivative(0.3) == 0.0


class TestInverse:
    def test_symmetric_line(self):
        assert MajorityMemory(1, 0.75).inverse(0.5) == pytest.approx(0.5, abs=1e-12)

    def test_linear_endpoint(self):
        assert LinearUrn(0.25, 0.5).inverse(0.25) == pytest.approx(0.0, abs=1e-12)

    def test_cubic_round_trip_at_quoted_point(self):
        spec = MajorityMemory(3, 0.9)
        y = spec.inverse(0.85355)
        assert abs(spec.value(y) - 0.85355) < 1e-10

    @pytest.mark.parametrize(
        "spec",
        [
            MajorityMemory(1, 0.8),
            MajorityMemory(3, 0.7),
            MajorityMemory(3, 0.95),
            MajorityMemory(5, 0.9),
            LinearUrn(0.1, 0.8),
            KgwUrn(0.7),
            MajorityMemory(1, 0.3),  # decreasing but still invertible
        ],
    )
    def test_round_trip_grid(self, spec):
        ys = np.linspace(0.0, 1.0, 101)
        back = spec.inverse(spec.value(ys))
        assert np.max(np.abs(np.asarray(back) - ys)) < 1e-10

    def test_residual_guarantee(self):
        spec = MajorityMemory(3, 0.9)
        qs = np.linspace(float(spec.value(0.0)), float(spec.value(1.0)), 51)
        resid = np.abs(np.asarray(spec.value(spec.inverse(qs))) - qs)
        assert resid.max() < 1e-12

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            MajorityMemory(3, 0.9).inverse(0.05)

    def test_non_monotone_rejected(self):
        with pytest.raises(UnsupportedUrnError):
            LinearUrn(0.5, 0.0).inverse(0.5)
        with pytest.raises(UnsupportedUrnError):
            MajorityMemory(3, 0.5).inverse(0.5)


class TestFixedPoints:
    def test_single_draw_center(self):
        fps = fixed_points(MajorityMemory(1, 0.75))
        assert len(fps) == 1
        assert fps[0].location == pytest.approx(0.5, abs=1e-12)
        assert fps[0].crossing is Crossing.DOWN

    def test_below_threshold_single_root(self):
        fps = fixed_points(MajorityMemory(3, 0.8))
        assert len(fps) == 1
        assert fps[0].crossing is Crossing.DOWN

    def test_above_threshold_three_roots(self):
        fps = fixed_points(MajorityMemory(3, 0.9))
        locs = [f.location for f in fps]
        s = 0.5 * math.sqrt((6 * 0.9 - 5) / (2 * 0.9 - 1))
        assert locs == pytest.approx([0.5 - s, 0.5, 0.5 + s], abs=1e-12)
        assert [f.crossing for f in fps] == [Crossing.DOWN, Crossing.UP, Crossing.DOWN]

    def test_root_count_flips_at_threshold(self):
        for p in np.linspace(0.51, 5 / 6 - 1e-6, 12):
            assert len(fixed_points(MajorityMemory(3, float(p)))) == 1
        for p in np.linspace(5 / 6 + 1e-6, 0.999, 12):
            assert len(fixed_points(MajorityMemory(3, float(p)))) == 3

    def test_tangent_reported_at_threshold(self):
        fps = fixed_points(MajorityMemory(3, 5 / 6))
        assert len(fps) == 1
        assert fps[0].crossing is Crossing.TANGENT

    def test_residuals_are_roots(self):
        for spec in (MajorityMemory(3, 0.9), MajorityMemory(5, 0.9), KgwUrn(2.0)):
            for f in fixed_points(spec):
                assert abs(float(spec.value(f.location)) - f.location) < 1e-9

    def test_quintic_above_threshold(self):
        fps = fixed_points(MajorityMemory(5, 0.9))
        assert len(fps) == 3
        assert fps[1].location == pytest.approx(0.5, abs=1e-9)

    def test_step_limit_branches(self):
        fps = fixed_points(StepLimitUrn(0.7))
        locs = [f.location for f in fps]
        assert locs == pytest.approx([0.3, 0.5, 0.7])
        assert [f.crossing for f in fps] == [Crossing.DOWN, Crossing.UP, Crossing.DOWN]
        low = fixed_points(StepLimitUrn(0.3))
        assert len(low) == 1 and low[0].location == 0.5
        assert low[0].crossing is Crossing.DOWN


class TestCriticalParams:
    def test_single_draw(self):
        cp = critical_params(1)
        assert cp.p_star == pytest.approx(0.75, abs=1e-10)
        assert cp.p_c is None
        assert cp.p_double_star is None

    def test_triple_draw(self):
        cp = critical_params(3)
        assert cp.p_star == pytest.approx(2 / 3, abs=1e-10)
        assert cp.p_c == pytest.approx(5 / 6, abs=1e-10)
        assert cp.p_double_star == pytest.approx(11 / 12, abs=1e-10)

    def test_step_limit_sentinel(self):
        cp = critical_params(math.inf)
        assert cp.p_c == 0.5
        assert cp.p_star is None and cp.p_double_star is None

    def test_closed_form_cross_check(self):
        # slope of pi at 1/2 is (2p-1) m C(k,m) / 2^(k-1); thresholds follow
        for k in (3, 5, 7):
            m = (k + 1) // 2
            dk = m * math.comb(k, m) / 2 ** (k - 1)
            cp = critical_params(k)
            assert cp.p_star == pytest.approx(0.5 * (1 + 1 / (2 * dk)), abs=1e-10)
            assert cp.p_c == pytest.approx(0.5 * (1 + 1 / dk), abs=1e-10)

    def test_rejects_even(self):
        with pytest.raises(ValueError):
            critical_params(4)


class TestCoordinateMaps:
    def test_trivial_values(self):
        assert y_from_x(0.0) == 0.5
        assert x_from_y(1.0) == 1.0

    def test_quoted_attractor_map(self):
        y_plus = 0.5 + 0.5 * math.sqrt((6 * 0.9 - 5) / (2 * 0.9 - 1))
        assert x_from_y(y_plus) == pytest.approx(math.sqrt((6 * 0.9 - 5) / (2 * 0.9 - 1)), abs=1e-12)

    def test_mutually_inverse(self):
        xs = np.linspace(-1, 1, 41)
        assert np.max(np.abs(x_from_y(y_from_x(xs)) - xs)) < 1e-15

    def test_range_validation(self):
        with pytest.raises(ValueError):
            x_from_y(1.5)
        with pytest.raises(ValueError):
            y_from_x(-1.01)
