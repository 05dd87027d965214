import math
import warnings

import numpy as np
import pytest
from scipy.special import logsumexp

from erwalk import (
    LinearUrn,
    MajorityMemory,
    ResourceLimitError,
    WalkInit,
    decay_exponent,
    entropy_profile,
    evolve,
    evolve_checkpoints,
    extrapolated_entropy,
    interval_log_mass,
    neg_bernoulli_kl,
)
from erwalk.exact import PreconditionWarning

from conftest import brute_force_log_probs


class TestEvolve:
    def test_memoryless_is_shifted_binomial(self):
        table = evolve(MajorityMemory(3, 0.5), WalkInit(1, 1), 5)
        # counts 1..5 follow 1 + Binomial(4, 1/2)
        assert table.log_prob[3] == pytest.approx(math.log(6 / 16), abs=1e-12)
        for n in range(1, 6):
            want = math.log(math.comb(4, n - 1) / 16)
            assert table.log_prob[n] == pytest.approx(want, abs=1e-12)

    @pytest.mark.parametrize("k,p", [(1, 0.6), (1, 0.75), (1, 0.9), (3, 0.6), (3, 0.75), (3, 0.9)])
    def test_matches_path_enumeration(self, k, p):
        spec = MajorityMemory(k, p)
        init = WalkInit(2, 1)
        table = evolve(spec, init, 10)
        brute = brute_force_log_probs(spec, init, 10)
        mask = np.isfinite(brute)
        assert np.allclose(table.log_prob[mask], brute[mask], atol=1e-12, rtol=0)
        assert np.all(np.isneginf(table.log_prob[~mask]))

    def test_bimodal_modes_near_attractors(self):
        table = evolve(MajorityMemory(3, 0.9), WalkInit(2, 1), 2000)
        lp = table.reachable_log_prob
        interior = (lp[1:-1] > lp[:-2]) & (lp[1:-1] > lp[2:])
        modes = table.shares[1:-1][interior]
        s = 0.5 * math.sqrt((6 * 0.9 - 5) / (2 * 0.9 - 1))
        assert len(modes) == 2
        assert abs(modes[0] - (0.5 - s)) < 0.02
        assert abs(modes[1] - (0.5 + s)) < 0.02

    def test_normalized_at_every_step(self):
        evolve(MajorityMemory(3, 0.9), WalkInit(2, 1), 300, check_normalization=True)

    def test_normalization_at_large_n(self):
        table = evolve(MajorityMemory(1, 0.75), WalkInit(2, 1), 4000)
        assert abs(logsumexp(table.reachable_log_prob)) < 1e-10

    def test_unreachable_counts_are_exactly_neg_inf(self):
        table = evolve(MajorityMemory(3, 0.8), WalkInit(4, 2), 50)
        assert np.all(np.isneginf(table.log_prob[:2]))
        assert np.all(np.isneginf(table.log_prob[49:]))
        assert np.all(np.isfinite(table.log_prob[2:49]))

    def test_symmetric_init_gives_symmetric_law(self):
        table = evolve(MajorityMemory(3, 0.9), WalkInit(2, 1), 401)
        lp = table.reachable_log_prob
        assert np.max(np.abs(lp - lp[::-1])) < 1e-12

    def test_validation(self):
        with pytest.raises(ValueError):
            evolve(MajorityMemory(1, 0.6), WalkInit(5, 2), 3)
        with pytest.raises(ResourceLimitError):
            evolve(MajorityMemory(1, 0.6), WalkInit(2, 1), 10**6)
        with pytest.raises(ValueError):
            WalkInit(2, 3)
        with pytest.raises(ValueError):
            WalkInit(0, 0)

    def test_checkpoints_match_separate_runs(self):
        spec = MajorityMemory(3, 0.85)
        tabs = evolve_checkpoints(spec, WalkInit(2, 1), [50, 120])
        solo = evolve(spec, WalkInit(2, 1), 50)
        assert np.array_equal(tabs[50].log_prob, solo.log_prob)
        assert tabs[120].N == 120


class TestIntervalMass:
    def test_complement_of_endpoint_atom(self):
        n_steps = 20
        table = evolve(MajorityMemory(1, 0.5), WalkInit(1, 1), n_steps)
        got = interval_log_mass(table, 0.0, 1.0)
        # only the all-positive atom (prob 2^-(N-1)) sits on the boundary
        assert got == pytest.approx(math.log(1 - 2.0 ** -(n_steps - 1)), abs=1e-9)

    def test_mass_drains_from_unstable_region(self, dp_cache):
        t1000, t4000 = dp_cache.get(3, 0.9, [1000, 4000])
        m_small = interval_log_mass(t1000, 0.4, 0.6)
        m_large = interval_log_mass(t4000, 0.4, 0.6)
        assert m_small > m_large

    def test_empty_interval(self):
        table = evolve(MajorityMemory(3, 0.9), WalkInit(2, 1), 100)
        assert interval_log_mass(table, 0.5, 0.5005) == -np.inf

    def test_strictness_excludes_boundary_atoms(self):
        table = evolve(MajorityMemory(1, 0.5), WalkInit(1, 1), 10)
        # strict inequalities drop the atoms sitting exactly at 0.2 and 0.3
        assert interval_log_mass(table, 0.2, 0.3) == -np.inf
        assert np.isfinite(interval_log_mass(table, 0.15, 0.35))
        with pytest.raises(ValueError):
            interval_log_mass(table, 0.6, 0.4)


class TestEntropyProfile:
    def test_memoryless_matches_stirling(self):
        n_steps = 4000
        table = evolve(MajorityMemory(1, 0.5), WalkInit(1, 1), n_steps)
        curve = entropy_profile(table)
        stirling = np.array([neg_bernoulli_kl(y, 0.5) for y in curve.y])
        bound = 5 * math.log(n_steps) / n_steps
        assert np.max(np.abs(curve.phi - stirling)) <= bound

    def test_peak_and_decay_single_draw(self, dp_cache):
        (table,) = dp_cache.get(1, 0.6, [4000])
        curve = entropy_profile(table)
        peak = curve.y[np.argmax(curve.phi)]
        assert abs(peak - 0.5) < 0.01
        far = np.abs(curve.y - 0.5) > 0.1
        assert np.all(curve.phi[far] < -1e-3)

    def test_plateau_above_destabilization(self, dp_cache):
        (table,) = dp_cache.get(3, 0.9, [4000])
        curve = entropy_profile(table)
        sel = (curve.y > 0.2) & (curve.y < 0.8)
        assert np.max(np.abs(curve.phi[sel])) <= 10 * math.log(4000) / 4000

    def test_extrapolation_requires_three_sizes(self, dp_cache):
        tabs = dp_cache.get(3, 0.9, [1000, 2000])
        with pytest.raises(ValueError):
            extrapolated_entropy(tabs, [0.9])

    def test_extrapolation_beats_finite_n(self, dp_cache):
        tabs = dp_cache.get(3, 0.9, [1000, 2000, 4000])
        ext = extrapolated_entropy(tabs, [0.95])
        fin = entropy_profile(tabs[-1]).at(0.95)
        # extrapolated value should sit above the finite-N one (prefactor is negative)
        assert ext.phi[0] > fin[0]


class TestDecayExponent:
    def test_exponent_near_slope_minus_one(self):
        expo = decay_exponent(
            MajorityMemory(3, 0.9), WalkInit(2, 1), 0.4, 0.6, [500, 1000, 2000, 4000, 8000]
        )
        # slope at the unstable center is 1.2; expect roughly 0.2
        assert 0.15 <= expo <= 0.25

    def test_warns_without_unstable_point(self):
        with pytest.warns(PreconditionWarning):
            decay_exponent(
                MajorityMemory(1, 0.75), WalkInit(2, 1), 0.4, 0.6, [200, 500, 2000]
            )

    def test_size_list_validation(self):
        with pytest.raises(ValueError):
            decay_exponent(MajorityMemory(3, 0.9), WalkInit(2, 1), 0.4, 0.6, [1000, 2000])
        with pytest.raises(ValueError):
            decay_exponent(MajorityMemory(3, 0.9), WalkInit(2, 1), 0.4, 0.6, [1000, 2000, 4000])


def test_all_positive_atom_tends_to_log_p():
    # the extreme atom's density converges to log p for the single-draw walk
    p = 0.75
    table = evolve(MajorityMemory(1, p), WalkInit(2, 1), 4000)
    top = table.reachable_log_prob[-1] / table.N
    assert abs(top - math.log(p)) < 5e-3
