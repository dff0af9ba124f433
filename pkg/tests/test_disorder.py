"""Tests for seed-reproducible dimerized Bernoulli potentials."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from dimerlab.disorder import (DisorderParams, PotentialConfig, dimer_phase_convention,
                               dimer_values, sample_config, sample_seed_for)

PARAMS = DisorderParams(v=0.5, p_plus=0.5, master_seed=123456789)


class TestDisorderParams:
    def test_valid_range(self):
        DisorderParams(v=1.999, p_plus=0.5, master_seed=0)
        DisorderParams(v=0.001, p_plus=0.999, master_seed=-5)

    @pytest.mark.parametrize("v", [-0.1, 2.0, 2.5])
    def test_invalid_v(self, v):
        with pytest.raises(ValueError):
            DisorderParams(v=v, p_plus=0.5, master_seed=0)

    @pytest.mark.parametrize("p", [-0.01, 1.01])
    def test_invalid_p(self, p):
        with pytest.raises(ValueError):
            DisorderParams(v=0.5, p_plus=p, master_seed=0)

    def test_degenerate_flagged_but_allowed(self):
        # endpoints stay usable as reference cases
        assert DisorderParams(v=0.0, p_plus=0.5, master_seed=0)._degenerate
        assert DisorderParams(v=0.5, p_plus=1.0, master_seed=0)._degenerate
        assert not DisorderParams(v=0.5, p_plus=0.5, master_seed=0)._degenerate

    def test_critical_energies(self):
        assert DisorderParams(v=0.7, p_plus=0.5, master_seed=0).critical_energies \
            == (0.0, 0.7)


class TestSampleConfig:
    @given(L=st.integers(1, 300), sample=st.integers(0, 50),
           seed=st.integers(-2**62, 2**62))
    @settings(max_examples=40, deadline=None)
    def test_dimer_constraint(self, L, sample, seed):
        p = DisorderParams(v=0.5, p_plus=0.5, master_seed=seed)
        cfg = sample_config(p, L, sample)
        vals = cfg.values
        for start in dimer_phase_convention(L):
            i = start + L
            assert vals[i] == vals[i + 1]

    @given(L=st.integers(1, 200), sample=st.integers(0, 20))
    @settings(max_examples=25, deadline=None)
    def test_determinism(self, L, sample):
        a = sample_config(PARAMS, L, sample)
        b = sample_config(PARAMS, L, sample)
        assert np.array_equal(a.values, b.values)
        assert a.sample_seed == b.sample_seed == sample_seed_for(PARAMS, sample)

    @given(L=st.integers(1, 100), L_big=st.integers(101, 400),
           sample=st.integers(0, 10))
    @settings(max_examples=25, deadline=None)
    def test_box_extension_consistency(self, L, L_big, sample):
        # a larger box extends a smaller one without shifting dimer values
        small = sample_config(PARAMS, L, sample)
        big = sample_config(PARAMS, L_big, sample)
        assert np.array_equal(big.values[L_big - L: L_big + L], small.values)

    def test_degenerate_bernoulli(self):
        ones = sample_config(DisorderParams(v=0.5, p_plus=1.0, master_seed=7), 50, 0)
        zeros = sample_config(DisorderParams(v=0.5, p_plus=0.0, master_seed=7), 50, 0)
        assert ones.values.min() == 1
        assert zeros.values.max() == 0

    def test_empirical_mean(self):
        cfg = sample_config(PARAMS, 100_000, 0)
        dimer_mean = cfg.values[::2].mean()  # one value per pair
        assert abs(dimer_mean - 0.5) < 0.01

    def test_chi_square_level(self):
        # 10^6 dimers, Bernoulli(0.3)
        p = DisorderParams(v=0.5, p_plus=0.3, master_seed=4242)
        draws = dimer_values(p, 0, np.arange(1_000_000))
        n1 = int(draws.sum())
        n = draws.size
        res = stats.chisquare([n1, n - n1], [0.3 * n, 0.7 * n])
        assert res.pvalue > 1e-3

    def test_distinct_samples_differ(self):
        a = sample_config(PARAMS, 500, 0)
        b = sample_config(PARAMS, 500, 1)
        assert not np.array_equal(a.values, b.values)

    def test_sample_reordering_invariance(self):
        # drawing sample 5 never depends on whether samples 0..4 were drawn
        direct = sample_config(PARAMS, 40, 5)
        for s in range(5):
            sample_config(PARAMS, 40, s)
        again = sample_config(PARAMS, 40, 5)
        assert np.array_equal(direct.values, again.values)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            sample_config(PARAMS, 0, 0)
        with pytest.raises(ValueError):
            sample_config(PARAMS, 10, -1)


class TestPhaseConvention:
    def test_examples(self):
        assert dimer_phase_convention(2) == [-2, 0]
        assert dimer_phase_convention(3) == [-2, 0]
        assert dimer_phase_convention(4) == [-4, -2, 0, 2]

    def test_L1_has_no_full_dimer(self):
        # Gamma_1 = {-1, 0}: the pair (0, 1) sticks out of the box, the pair
        # (-2, -1) starts outside; both edge sites are fragments
        assert dimer_phase_convention(1) == []

    @given(L=st.integers(1, 500))
    @settings(max_examples=50, deadline=None)
    def test_postcondition(self, L):
        starts = dimer_phase_convention(L)
        for s in starts:
            assert s % 2 == 0 and -L <= s and s + 1 <= L - 1
        # maximality: one more dimer on either side leaves the box
        if starts:
            assert starts[0] - 2 < -L or starts[0] - 1 < -L
            assert starts[-1] + 3 > L - 1

    def test_edge_fragments_inherit_partner_draw(self):
        # odd L: site L-1 is even, its partner L lies outside; the fragment
        # must carry the same dimer draw a larger box reveals
        cfg3 = sample_config(PARAMS, 3, 0)
        cfg5 = sample_config(PARAMS, 5, 0)
        assert cfg3.value_at(2) == cfg5.value_at(2) == cfg5.value_at(3)


class TestSerialization:
    def test_csv_roundtrip(self):
        cfg = sample_config(PARAMS, 37, 4)
        back = PotentialConfig.from_csv_row(cfg.to_csv_row())
        assert back.L == cfg.L
        assert back.sample_index == cfg.sample_index
        assert back.sample_seed == cfg.sample_seed
        assert np.array_equal(back.values, cfg.values)

    def test_value_validation(self):
        with pytest.raises(ValueError):
            PotentialConfig(L=2, values=np.array([0, 1, 2, 0]), sample_seed=0)
        with pytest.raises(ValueError):
            PotentialConfig(L=2, values=np.array([0, 1]), sample_seed=0)

    def test_value_at_bounds(self):
        cfg = sample_config(PARAMS, 5, 0)
        cfg.value_at(-5)
        cfg.value_at(4)
        with pytest.raises(IndexError):
            cfg.value_at(5)
        with pytest.raises(IndexError):
            cfg.value_at(-6)
