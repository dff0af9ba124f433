"""Disorder-averaged Monte Carlo sweeps and scaling fits.

A sweep evaluates region entropies over a geometric grid of box sizes,
many disorder samples per size, and one or more Fermi energies, then fits
mean entropy against ln L. The headline comparison contrasts the critical
Fermi energies (logarithmic growth) against off-critical ones (area-law
plateau). A single-realization variant tracks Q(boundary region)/ln L
along the grid without averaging.

Execution is task-parallel over (E_F, L, sample) with a determinism
contract: results are keyed and reduced in a fixed key order, so the
output is byte-identical regardless of worker count or scheduling.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from dimerlab.criticality import box_position
from dimerlab.disorder import DisorderParams, sample_config
from dimerlab.entropy import Region, binary_entropy
from dimerlab.operator import build_hamiltonian, region_occupations

__all__ = [
    "SweepPlan",
    "ScalingResult",
    "run_sweep",
    "fit_log_scaling",
    "critical_vs_localized",
    "theorem12_check",
    "region_for",
    "worker_count",
]

REGION_MODES = ("halfline", "interior", "boundary")

RESULT_COLUMNS = ("E_F", "L", "sample_index", "S", "Q", "n_below", "status")

WORKERS_ENV = "DIMERLAB_WORKERS"


def worker_count(explicit: int | None = None) -> int:
    if explicit is not None:
        if explicit < 1:
            raise ValueError("worker count must be >= 1")
        return explicit
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SweepPlan:
    """Declarative description of a sweep; hashable and file-round-trippable.

    region_mode selects the subsystem per box size L:
      - "halfline": A = {1, ..., L} inside the enlarged box Gamma_{L+1}
        (the positive half of the chain);
      - "interior": A = [-L + floor(gamma L), -L + floor((gamma+delta) L) - 1]
        inside Gamma_L;
      - "boundary": A = [-L, -(1-delta) L] inside Gamma_L (gamma = 0 case).
    """

    L_grid: tuple[int, ...]
    samples: int
    E_F_list: tuple[float, ...]
    v: float
    p_plus: float
    master_seed: int
    region_mode: str = "halfline"
    gamma: float = 0.0
    delta: float = 0.05
    alpha: float = 1.0 / 12.0
    burn_in: int = 512
    workers_hint: int = 0  # 0 = decide at run time
    assertions: tuple[str, ...] = ()

    def __post_init__(self):
        grid = tuple(int(L) for L in self.L_grid)
        if len(grid) == 0 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("L grid must be non-empty and strictly increasing")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.region_mode not in REGION_MODES:
            raise ValueError(f"region_mode must be one of {REGION_MODES}")
        if not self.E_F_list:
            raise ValueError("need at least one Fermi energy")
        object.__setattr__(self, "L_grid", grid)
        object.__setattr__(self, "E_F_list", tuple(float(e) for e in self.E_F_list))
        object.__setattr__(self, "assertions", tuple(self.assertions))
        # parameter validity via DisorderParams
        DisorderParams(v=self.v, p_plus=self.p_plus, master_seed=self.master_seed)

    # -- serialization ----------------------------------------------------
    _SCALARS = ("samples", "v", "p_plus", "master_seed", "region_mode",
                "gamma", "delta", "alpha", "burn_in")

    def canonical_text(self) -> str:
        """Key-sorted plain-text form; basis of the plan hash (the
        non-semantic workers_hint is excluded)."""
        items = {
            "L_grid": " ".join(str(L) for L in self.L_grid),
            "E_F_list": " ".join(f"{e:.17g}" for e in self.E_F_list),
        }
        for k in self._SCALARS:
            v = getattr(self, k)
            items[k] = f"{v:.17g}" if isinstance(v, float) else str(v)
        lines = [f"{k} = {items[k]}" for k in sorted(items)]
        lines += [f"assert {a}" for a in self.assertions]
        return "\n".join(lines) + "\n"

    def plan_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:16]

    def to_file(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("# sweep plan\n")
            fh.write(self.canonical_text())

    @classmethod
    def from_text(cls, text: str) -> "SweepPlan":
        kv: dict[str, str] = {}
        asserts: list[str] = []
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("assert "):
                asserts.append(line[len("assert "):].strip())
                continue
            if "=" not in line:
                raise ValueError(f"plan line {ln}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key in kv:
                raise ValueError(f"plan line {ln}: duplicate key {key!r}")
            kv[key] = value

        def need(key):
            if key not in kv:
                raise ValueError(f"plan is missing required key {key!r}")
            return kv.pop(key)

        plan = cls(
            L_grid=tuple(int(t) for t in need("L_grid").split()),
            samples=int(need("samples")),
            E_F_list=tuple(float(t) for t in need("E_F_list").split()),
            v=float(need("v")),
            p_plus=float(need("p_plus")),
            master_seed=int(need("master_seed")),
            region_mode=kv.pop("region_mode", "halfline"),
            gamma=float(kv.pop("gamma", "0")),
            delta=float(kv.pop("delta", "0.05")),
            alpha=float(kv.pop("alpha", str(1.0 / 12.0))),
            burn_in=int(kv.pop("burn_in", "512")),
            workers_hint=int(kv.pop("workers_hint", "0")),
            assertions=tuple(asserts),
        )
        if kv:
            raise ValueError(f"unknown plan keys: {sorted(kv)}")
        return plan

    @classmethod
    def from_file(cls, path) -> "SweepPlan":
        with open(path) as fh:
            return cls.from_text(fh.read())


def region_for(plan: SweepPlan, L: int) -> tuple[int, Region]:
    """(box half-width, region) realizing the plan's region mode at size L."""
    if plan.region_mode == "halfline":
        return L + 1, Region(1, L)
    if plan.region_mode == "interior":
        return L, box_position(L, plan.gamma, plan.delta)
    # boundary: [-L, -(1-delta) L]
    x2 = -math.ceil((1.0 - plan.delta) * L)
    return L, Region(-L, x2)


# -- per-task computation (top-level for process pools) -------------------

def _entropy_task(args: tuple) -> dict:
    (v, p_plus, master_seed, region_mode, gamma, delta,
     L, sample_index, E_F, need_S) = args
    plan_like = SweepPlan(L_grid=(L,), samples=1, E_F_list=(E_F,), v=v,
                          p_plus=p_plus, master_seed=master_seed,
                          region_mode=region_mode, gamma=gamma, delta=delta)
    try:
        box_L, A = region_for(plan_like, L)
        params = DisorderParams(v=v, p_plus=p_plus, master_seed=master_seed)
        cfg = sample_config(params, box_L, sample_index)
        H = build_hamiltonian(cfg, params)
        lam, n_below = region_occupations(H, A.indices_in(box_L), E_F)
        Q = float(np.sum(4.0 * lam * (1.0 - lam)))
        S = float(np.sum(binary_entropy(lam))) if need_S else math.nan
        return {"E_F": E_F, "L": L, "sample_index": sample_index,
                "S": S, "Q": Q, "n_below": n_below, "status": "ok"}
    except Exception as exc:  # recorded, never silently dropped
        return {"E_F": E_F, "L": L, "sample_index": sample_index,
                "S": math.nan, "Q": math.nan, "n_below": -1,
                "status": f"error: {type(exc).__name__}: {exc}"}


def _task_args(plan: SweepPlan, need_S: bool) -> list[tuple]:
    return [(plan.v, plan.p_plus, plan.master_seed, plan.region_mode,
             plan.gamma, plan.delta, L, s, E_F, need_S)
            for E_F in plan.E_F_list
            for L in plan.L_grid
            for s in range(plan.samples)]


def _cache_path(cache_dir: str, args: tuple) -> str:
    key = hashlib.sha256(repr(args).encode()).hexdigest()[:24]
    return os.path.join(cache_dir, f"task-{key}.json")


def _execute(plan: SweepPlan, need_S: bool, workers: int | None,
             cache_dir: str | None) -> list[dict]:
    """All task rows in the fixed (E_F, L, sample) order."""
    tasks = _task_args(plan, need_S)
    results: dict[tuple, dict] = {}
    pending: list[tuple] = []
    if cache_dir:
        os.makedirs(cache_dir, exist_ok=True)
        for t in tasks:
            path = _cache_path(cache_dir, t)
            if os.path.exists(path):
                with open(path) as fh:
                    results[t] = json.load(fh)
            else:
                pending.append(t)
    else:
        pending = tasks

    n_workers = min(worker_count(workers if workers is not None
                                 else (plan.workers_hint or None)), max(len(pending), 1))
    if pending:
        if n_workers > 1:
            pool = ProcessPoolExecutor(max_workers=n_workers)
            row_iter = pool.map(_entropy_task, pending, chunksize=1)
        else:
            pool = None
            row_iter = map(_entropy_task, pending)
        try:
            # consume lazily so cache entries land as tasks finish
            for t, row in zip(pending, row_iter):
                results[t] = row
                if cache_dir:
                    tmp = _cache_path(cache_dir, t) + ".tmp"
                    with open(tmp, "w") as fh:
                        json.dump(row, fh)
                    os.replace(tmp, _cache_path(cache_dir, t))
        finally:
            if pool is not None:
                pool.shutdown()
    return [results[t] for t in tasks]


# -- fitting and aggregation ----------------------------------------------

def fit_log_scaling(L_values, means, stderrs, burn_in: int = 0) -> dict:
    """Weighted least squares of mean entropy against ln L.

    Weights are inverse variances from the per-L standard errors (a floor
    avoids infinite weight on zero-variance synthetic input). Returns
    slope, intercept, their standard errors, R^2, and the points used.
    """
    L_values = np.asarray(L_values, dtype=float)
    means = np.asarray(means, dtype=float)
    stderrs = np.asarray(stderrs, dtype=float)
    keep = L_values >= burn_in
    L_values, means, stderrs = L_values[keep], means[keep], stderrs[keep]
    if np.unique(L_values).size < 3:
        raise ValueError("need at least 3 distinct box sizes after burn-in")
    x = np.log(L_values)
    floor = max(1e-12, 1e-9 * float(np.max(np.abs(means)) or 1.0))
    w = 1.0 / np.maximum(stderrs, floor) ** 2
    X = np.column_stack([x, np.ones_like(x)])
    XtW = X.T * w
    cov = np.linalg.inv(XtW @ X)
    beta = cov @ (XtW @ means)
    resid = means - X @ beta
    dof = max(x.size - 2, 1)
    chi2 = float(np.sum(w * resid ** 2))
    scale = max(chi2 / dof, 1.0)  # inflate errors when the fit underperforms
    se = np.sqrt(np.diag(cov) * scale)
    ss_tot = float(np.sum(w * (means - np.average(means, weights=w)) ** 2))
    r2 = 1.0 - chi2 / ss_tot if ss_tot > 0.0 else 1.0
    return {
        "slope": float(beta[0]),
        "intercept": float(beta[1]),
        "slope_stderr": float(se[0]),
        "intercept_stderr": float(se[1]),
        "r_squared": r2,
        "points_used": int(x.size),
    }


@dataclass(frozen=True)
class ScalingResult:
    """Aggregated sweep output: per-(E_F, L) statistics plus log fits."""

    plan: SweepPlan
    rows: tuple[dict, ...] = field(repr=False)
    per_L: dict = field(repr=False)   # E_F -> {"L", "mean_S", "stderr_S", ...}
    fits: dict = field(repr=False)    # E_F -> fit dict or {"error": ...}
    n_failed: int = 0

    def rows_csv(self) -> str:
        lines = [",".join(RESULT_COLUMNS)]
        for r in self.rows:
            lines.append(f"{r['E_F']:.17g},{r['L']},{r['sample_index']},"
                         f"{r['S']:.17g},{r['Q']:.17g},{r['n_below']},{r['status']}")
        return "\n".join(lines) + "\n"

    def summary_json(self) -> str:
        per_L = {f"{ef:.17g}": {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                                for k, v in d.items()}
                 for ef, d in self.per_L.items()}
        fits = {f"{ef:.17g}": f for ef, f in self.fits.items()}
        return json.dumps({
            "plan_hash": self.plan.plan_hash(),
            "n_rows": len(self.rows),
            "n_failed": self.n_failed,
            "per_L": per_L,
            "fits": fits,
        }, indent=2, sort_keys=True)


def _aggregate(plan: SweepPlan, rows: list[dict]) -> ScalingResult:
    per_L: dict = {}
    fits: dict = {}
    n_failed = sum(r["status"] != "ok" for r in rows)
    for E_F in plan.E_F_list:
        Ls, mS, eS, mQ, eQ, bad = [], [], [], [], [], []
        for L in plan.L_grid:
            # fixed summation order: rows are already sorted by sample_index
            sel = [r for r in rows if r["E_F"] == E_F and r["L"] == L
                   and r["status"] == "ok"]
            n_bad = sum(1 for r in rows
                        if r["E_F"] == E_F and r["L"] == L and r["status"] != "ok")
            if not sel:
                continue
            S = np.array([r["S"] for r in sel])
            Q = np.array([r["Q"] for r in sel])
            n = len(sel)
            Ls.append(L)
            mS.append(float(np.mean(S)))
            eS.append(float(np.std(S, ddof=1) / np.sqrt(n)) if n > 1 else 0.0)
            mQ.append(float(np.mean(Q)))
            eQ.append(float(np.std(Q, ddof=1) / np.sqrt(n)) if n > 1 else 0.0)
            bad.append(n_bad / (n + n_bad))
        per_L[E_F] = {"L": np.array(Ls), "mean_S": np.array(mS),
                      "stderr_S": np.array(eS), "mean_Q": np.array(mQ),
                      "stderr_Q": np.array(eQ), "bad_fraction": np.array(bad)}
        try:
            fits[E_F] = fit_log_scaling(Ls, mS, eS, burn_in=plan.burn_in)
        except ValueError as exc:
            fits[E_F] = {"error": str(exc)}
    return ScalingResult(plan=plan, rows=tuple(rows), per_L=per_L, fits=fits,
                         n_failed=n_failed)


def run_sweep(plan: SweepPlan, workers: int | None = None,
              cache_dir: str | None = None) -> ScalingResult:
    """Execute the plan and aggregate. Deterministic in the plan alone:
    worker count, scheduling, and cache state never change the output."""
    rows = _execute(plan, need_S=True, workers=workers, cache_dir=cache_dir)
    return _aggregate(plan, rows)


def critical_vs_localized(result_critical: ScalingResult,
                          result_offcritical: ScalingResult,
                          z: float = 1.96) -> dict:
    """Headline comparison of one critical and one off-critical sweep.

    Verdict "enhanced" iff the critical slope's confidence interval lies
    above 0; "area-law" iff the off-critical CI contains 0 and the means
    at the two largest box sizes agree within twice their combined
    standard error.
    """
    for res in (result_critical, result_offcritical):
        if len(res.plan.E_F_list) != 1:
            raise ValueError("each comparison sweep must target a single E_F")
    a = replace(result_critical.plan, E_F_list=(0.0,), v=1.0)
    b = replace(result_offcritical.plan, E_F_list=(0.0,), v=1.0)
    if a != b:
        raise ValueError(
            "plans may differ only in Fermi energy and disorder strength")

    def side(res: ScalingResult) -> dict:
        ef = res.plan.E_F_list[0]
        fit = res.fits[ef]
        if "error" in fit:
            return {"E_F": ef, "fit": fit}
        lo = fit["slope"] - z * fit["slope_stderr"]
        hi = fit["slope"] + z * fit["slope_stderr"]
        d = res.per_L[ef]
        plateau = None
        if d["L"].size >= 2:
            gap = abs(d["mean_S"][-1] - d["mean_S"][-2])
            comb = math.hypot(d["stderr_S"][-1], d["stderr_S"][-2])
            plateau = bool(gap < 2.0 * comb)
        return {"E_F": ef, "fit": fit, "ci": (lo, hi), "plateau": plateau}

    crit, off = side(result_critical), side(result_offcritical)
    return {
        "critical": crit,
        "offcritical": off,
        "verdict_enhanced": bool("ci" in crit and crit["ci"][0] > 0.0),
        "verdict_area_law": bool("ci" in off and off["ci"][0] <= 0.0 <= off["ci"][1]
                                 and off.get("plateau")),
    }


def theorem12_check(plan: SweepPlan, workers: int | None = None,
                    cache_dir: str | None = None,
                    delta_cap: float = 0.1) -> dict:
    """Per-realization Q(boundary region)/ln L trajectories over the grid.

    No averaging: each disorder realization keeps its own ratio series;
    reported per realization is the minimum over the top half of the grid.
    """
    if plan.region_mode != "boundary":
        raise ValueError("theorem12_check requires region_mode = 'boundary'")
    if len(plan.E_F_list) != 1:
        raise ValueError("theorem12_check requires a single Fermi energy")
    import warnings
    if not 0.0 < plan.delta <= delta_cap:
        warnings.warn(f"delta = {plan.delta} outside (0, {delta_cap}]; "
                      "computed anyway", RuntimeWarning, stacklevel=2)
    rows = _execute(plan, need_S=False, workers=workers, cache_dir=cache_dir)
    grid = plan.L_grid
    top_half = grid[len(grid) // 2:]
    ratios = {}       # sample -> {L: Q/ln L}
    min_top = {}
    failed = []
    for s in range(plan.samples):
        series = {}
        ok = True
        for r in rows:
            if r["sample_index"] == s:
                if r["status"] != "ok":
                    ok = False
                    continue
                series[r["L"]] = r["Q"] / math.log(r["L"])
        ratios[s] = series
        if ok and all(L in series for L in top_half):
            min_top[s] = min(series[L] for L in top_half)
        else:
            failed.append(s)
    return {
        "plan_hash": plan.plan_hash(),
        "ratios": ratios,
        "min_over_top_half": min_top,
        "top_half_grid": top_half,
        "failed_samples": failed,
        "rows": rows,
    }
