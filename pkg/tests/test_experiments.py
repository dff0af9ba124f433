"""Tests for sweep plans, execution determinism, and scaling fits."""

import math

import numpy as np
import pytest

from dimerlab.disorder import DisorderParams, sample_config
from dimerlab.entropy import Region, entanglement_entropy
from dimerlab.experiments import (ScalingResult, SweepPlan, _aggregate,
                                  critical_vs_localized, fit_log_scaling,
                                  region_for, run_sweep, theorem12_check,
                                  worker_count)
from dimerlab.operator import build_hamiltonian, eigensystem

TINY = SweepPlan(L_grid=(24, 48, 96), samples=3, E_F_list=(0.0,), v=0.4,
                 p_plus=0.5, master_seed=7, burn_in=0)


class TestSweepPlan:
    def test_validation(self):
        with pytest.raises(ValueError):
            SweepPlan(L_grid=(), samples=1, E_F_list=(0.0,), v=0.3,
                      p_plus=0.5, master_seed=0)
        with pytest.raises(ValueError):
            SweepPlan(L_grid=(64, 32), samples=1, E_F_list=(0.0,), v=0.3,
                      p_plus=0.5, master_seed=0)
        with pytest.raises(ValueError):
            SweepPlan(L_grid=(32,), samples=0, E_F_list=(0.0,), v=0.3,
                      p_plus=0.5, master_seed=0)
        with pytest.raises(ValueError):
            SweepPlan(L_grid=(32,), samples=1, E_F_list=(0.0,), v=0.3,
                      p_plus=0.5, master_seed=0, region_mode="torus")

    def test_text_roundtrip(self):
        plan = SweepPlan(L_grid=(128, 256), samples=5, E_F_list=(0.0, -1.0),
                         v=1.0, p_plus=0.4, master_seed=99,
                         region_mode="boundary", delta=0.07,
                         assertions=("n_failed == 0",))
        assert SweepPlan.from_text(plan.canonical_text()) == plan

    def test_hash_stable_under_key_reordering(self):
        text = TINY.canonical_text()
        lines = [ln for ln in text.splitlines() if ln]
        shuffled = "\n".join(reversed(lines))
        assert SweepPlan.from_text(shuffled).plan_hash() == TINY.plan_hash()

    def test_hash_changes_with_semantics(self):
        other = SweepPlan(L_grid=(24, 48, 96), samples=3, E_F_list=(0.0,),
                          v=0.4, p_plus=0.5, master_seed=8, burn_in=0)
        assert other.plan_hash() != TINY.plan_hash()

    def test_workers_hint_not_semantic(self):
        hinted = SweepPlan(L_grid=(24, 48, 96), samples=3, E_F_list=(0.0,),
                           v=0.4, p_plus=0.5, master_seed=7, burn_in=0,
                           workers_hint=8)
        assert hinted.plan_hash() == TINY.plan_hash()

    def test_bad_plan_text(self):
        with pytest.raises(ValueError):
            SweepPlan.from_text("L_grid = 32\nsamples = 1\n")  # missing keys
        with pytest.raises(ValueError):
            SweepPlan.from_text(TINY.canonical_text() + "mystery = 3\n")
        with pytest.raises(ValueError):
            SweepPlan.from_text(TINY.canonical_text() + "samples = 2\n")

    def test_file_roundtrip(self, tmp_path):
        path = tmp_path / "plan.txt"
        TINY.to_file(path)
        assert SweepPlan.from_file(path) == TINY


class TestRegionFor:
    def test_halfline(self):
        box_L, A = region_for(TINY, 100)
        assert box_L == 101 and A == Region(1, 100)

    def test_boundary(self):
        plan = SweepPlan(L_grid=(100,), samples=1, E_F_list=(0.0,), v=1.0,
                         p_plus=0.5, master_seed=0, region_mode="boundary",
                         delta=0.05)
        box_L, A = region_for(plan, 100)
        assert box_L == 100 and A.x1 == -100 and A.x2 == -95

    def test_interior(self):
        plan = SweepPlan(L_grid=(100,), samples=1, E_F_list=(0.0,), v=1.0,
                         p_plus=0.5, master_seed=0, region_mode="interior",
                         gamma=0.1, delta=0.2)
        box_L, A = region_for(plan, 100)
        assert box_L == 100 and A == Region(-90, -71)


class TestFit:
    def test_exact_line(self):
        Ls = [64, 128, 256, 512]
        f = fit_log_scaling(Ls, [0.3 * math.log(L) + 1.0 for L in Ls],
                            [0.0] * 4)
        assert f["slope"] == pytest.approx(0.3, abs=1e-12)
        assert f["intercept"] == pytest.approx(1.0, abs=1e-10)

    def test_constant(self):
        f = fit_log_scaling([64, 128, 256], [2.0, 2.0, 2.0], [0.0] * 3)
        assert f["slope"] == pytest.approx(0.0, abs=1e-12)

    def test_noisy_recovery(self):
        rng = np.random.default_rng(5)
        Ls = [2 ** k for k in range(6, 14)]
        sigma = 0.01
        means = [0.2 * math.log(L) + 0.5 + rng.normal(0, sigma) for L in Ls]
        f = fit_log_scaling(Ls, means, [sigma] * len(Ls))
        assert abs(f["slope"] - 0.2) < 3.0 * f["slope_stderr"] + 1e-6

    def test_burn_in_and_degenerate(self):
        with pytest.raises(ValueError):
            fit_log_scaling([64, 128], [1.0, 2.0], [0.1, 0.1])
        with pytest.raises(ValueError):
            fit_log_scaling([64, 128, 256, 512], [1, 2, 3, 4], [0.1] * 4,
                            burn_in=300)


class TestRunSweep:
    def test_determinism_across_workers(self):
        r1 = run_sweep(TINY, workers=1)
        r2 = run_sweep(TINY, workers=3)
        assert r1.rows_csv() == r2.rows_csv()
        assert r1.summary_json() == r2.summary_json()

    def test_cache_reuse(self, tmp_path):
        cache = str(tmp_path / "cache")
        r1 = run_sweep(TINY, workers=2, cache_dir=cache)
        r2 = run_sweep(TINY, workers=1, cache_dir=cache)  # pure cache hits
        assert r1.rows_csv() == r2.rows_csv()

    def test_rows_match_direct_computation(self):
        result = run_sweep(TINY, workers=1)
        row = next(r for r in result.rows if r["L"] == 48 and r["sample_index"] == 2)
        params = DisorderParams(v=TINY.v, p_plus=TINY.p_plus,
                                master_seed=TINY.master_seed)
        box_L, A = region_for(TINY, 48)
        spec = eigensystem(build_hamiltonian(sample_config(params, box_L, 2),
                                             params))
        ref = entanglement_entropy(spec, A, 0.0)
        assert row["S"] == pytest.approx(ref.S, abs=1e-9)
        assert row["Q"] == pytest.approx(ref.Q, abs=1e-9)
        assert row["status"] == "ok"

    def test_stderr_scaling_with_samples(self):
        # standard error of the per-L mean shrinks like samples^(-1/2)
        rng = np.random.default_rng(11)
        exps = []
        ns = [16, 64, 256, 1024]
        stderrs = []
        for n in ns:
            rows = [{"E_F": 0.0, "L": 64, "sample_index": i,
                     "S": float(rng.normal(2.0, 0.3)), "Q": 1.0,
                     "n_below": 1, "status": "ok"} for i in range(n)]
            plan = SweepPlan(L_grid=(64,), samples=n, E_F_list=(0.0,), v=0.3,
                             p_plus=0.5, master_seed=0, burn_in=0)
            agg = _aggregate(plan, rows)
            stderrs.append(agg.per_L[0.0]["stderr_S"][0])
        slope = np.polyfit(np.log(ns), np.log(stderrs), 1)[0]
        assert abs(slope + 0.5) < 0.05

    def test_failures_recorded_not_dropped(self):
        rows = [{"E_F": 0.0, "L": 64, "sample_index": 0, "S": 1.0, "Q": 1.0,
                 "n_below": 1, "status": "ok"},
                {"E_F": 0.0, "L": 64, "sample_index": 1, "S": math.nan,
                 "Q": math.nan, "n_below": -1, "status": "error: boom"}]
        plan = SweepPlan(L_grid=(64,), samples=2, E_F_list=(0.0,), v=0.3,
                         p_plus=0.5, master_seed=0, burn_in=0)
        agg = _aggregate(plan, rows)
        assert agg.n_failed == 1
        assert agg.per_L[0.0]["bad_fraction"][0] == pytest.approx(0.5)

    def test_free_fermion_slope_oracle_one_cut(self):
        # v=0, halfline region: exactly one entangling cut (the other region
        # edge coincides with the box boundary), so S grows like
        # (1/6) log2 L and the slope vs ln L is 1/(6 ln 2) ~ 0.2405
        plan = SweepPlan(L_grid=(256, 512, 1024, 2048), samples=1,
                         E_F_list=(0.0,), v=0.0, p_plus=0.5, master_seed=1,
                         burn_in=0)
        result = run_sweep(plan, workers=1)
        slope = result.fits[0.0]["slope"]
        assert 0.20 <= slope <= 0.28

    def test_free_fermion_slope_oracle_two_cuts(self):
        # v=0, interior block [-L/2, -1]: two cuts double the prefactor to
        # 1/(3 ln 2) ~ 0.481; desk-scale fit lands in [0.40, 0.56]
        plan = SweepPlan(L_grid=(256, 512, 1024, 2048), samples=1,
                         E_F_list=(0.0,), v=0.0, p_plus=0.5, master_seed=1,
                         region_mode="interior", gamma=0.5, delta=0.5,
                         burn_in=0)
        result = run_sweep(plan, workers=1)
        slope = result.fits[0.0]["slope"]
        assert 0.40 <= slope <= 0.56

    def test_monotone_information_bound(self):
        # adding one site moves Q by at most 4 and S by at most 8
        params = DisorderParams(v=0.8, p_plus=0.5, master_seed=13)
        spec = eigensystem(build_hamiltonian(sample_config(params, 50, 0),
                                             params))
        A = Region(-10, 10)
        B = Region(-10, 11)
        ra = entanglement_entropy(spec, A, 0.0)
        rb = entanglement_entropy(spec, B, 0.0)
        assert abs(rb.Q - ra.Q) <= 4.0 + 1e-9
        assert abs(rb.S - ra.S) <= 8.0 + 1e-9


class TestComparisons:
    def test_identical_plans_equal_slopes(self):
        r1 = run_sweep(TINY, workers=1)
        r2 = run_sweep(TINY, workers=2)
        rep = critical_vs_localized(r1, r2)
        assert rep["critical"]["fit"]["slope"] == rep["offcritical"]["fit"]["slope"]

    def test_plan_mismatch_rejected(self):
        other = SweepPlan(L_grid=(24, 48), samples=3, E_F_list=(0.0,), v=0.4,
                          p_plus=0.5, master_seed=7, burn_in=0)
        with pytest.raises(ValueError):
            critical_vs_localized(run_sweep(TINY, workers=1),
                                  run_sweep(other, workers=1))

    def test_theorem12_requires_boundary_mode(self):
        with pytest.raises(ValueError):
            theorem12_check(TINY)

    def test_theorem12_small_run(self, tmp_path):
        plan = SweepPlan(L_grid=(32, 64, 128, 256), samples=2, E_F_list=(0.0,),
                         v=1.0, p_plus=0.5, master_seed=3,
                         region_mode="boundary", delta=0.08, burn_in=0)
        rep = theorem12_check(plan, workers=1, cache_dir=str(tmp_path / "c"))
        assert rep["top_half_grid"] == (128, 256)
        assert set(rep["min_over_top_half"]) == {0, 1}
        for s, series in rep["ratios"].items():
            for L, ratio in series.items():
                assert ratio > 0.0

    def test_theorem12_delta_warning(self):
        plan = SweepPlan(L_grid=(32, 64), samples=1, E_F_list=(0.0,), v=1.0,
                         p_plus=0.5, master_seed=3, region_mode="boundary",
                         delta=0.5, burn_in=0)
        with pytest.warns(RuntimeWarning):
            theorem12_check(plan, workers=1)


class TestWorkerCount:
    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("DIMERLAB_WORKERS", "3")
        assert worker_count() == 3
        monkeypatch.delenv("DIMERLAB_WORKERS")
        assert worker_count(5) == 5
        with pytest.raises(ValueError):
            worker_count(0)
