"""Command-line driver: spectrum / entropy / sweep subcommands.

The CLI is a thin single-threaded layer over the library; all numeric
output uses 17 significant digits so reruns are byte-comparable. Every
results file starts with a manifest header (commented lines) whose
fields are deterministic; wall-clock timestamps go only to the separate
manifest JSON so that result files stay byte-identical across reruns.

Exit codes: 0 success, 1 failed plan assertion, 2 usage/validation error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

import dimerlab
from dimerlab.criticality import CriticalWindow, window_spacings
from dimerlab.disorder import DisorderParams, sample_config
from dimerlab.entropy import (Region, entanglement_entropy, fermi_dirac_entropy,
                              finite_vs_padded, quadratic_entropy_commutator)
from dimerlab.experiments import SweepPlan, run_sweep, worker_count
from dimerlab.operator import build_hamiltonian, eigensystem

__all__ = ["RunManifest", "main"]

TOLERANCES = {
    "quadratic_identity_rel": 1e-8,
    "eigen_residual": 1e-9,
    "angle_quantization": 1e-6,
}


@dataclass(frozen=True)
class RunManifest:
    """Provenance block attached to every output."""

    plan_hash: str
    master_seed: int
    version: str = dimerlab.__version__
    tolerances: dict = field(default_factory=lambda: dict(TOLERANCES))

    def header_lines(self) -> list[str]:
        """Deterministic manifest header for result files."""
        return [
            f"# dimerlab {self.version}",
            f"# plan_hash {self.plan_hash}",
            f"# master_seed {self.master_seed}",
            "# tolerances " + json.dumps(self.tolerances, sort_keys=True),
        ]

    def json_text(self, timestamp: bool = True) -> str:
        doc = {
            "version": self.version,
            "plan_hash": self.plan_hash,
            "master_seed": self.master_seed,
            "tolerances": self.tolerances,
        }
        if timestamp:
            doc["timestamp_utc"] = datetime.now(timezone.utc).isoformat()
        return json.dumps(doc, indent=2, sort_keys=True)


def _args_hash(payload: dict) -> str:
    text = json.dumps(payload, sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _params(parser: argparse.ArgumentParser, args) -> DisorderParams:
    try:
        return DisorderParams(v=args.v, p_plus=args.p_plus,
                              master_seed=args.seed)
    except ValueError as exc:
        parser.error(str(exc))  # exits 2


# -- spectrum --------------------------------------------------------------

def cmd_spectrum(parser, args) -> int:
    params = _params(parser, args)
    if args.L < 1:
        parser.error("--L must be >= 1")
    cfg = sample_config(params, args.L, args.sample)
    H = build_hamiltonian(cfg, params, boundary=args.boundary)
    spec = eigensystem(H)
    manifest = RunManifest(
        plan_hash=_args_hash({"cmd": "spectrum", "L": args.L, "v": args.v,
                              "p_plus": args.p_plus, "seed": args.seed,
                              "sample": args.sample, "boundary": args.boundary,
                              "window": args.window}),
        master_seed=args.seed)
    lines = manifest.header_lines()
    if args.window is None:
        lines.append("index,eigenvalue")
        lines += [f"{j},{E:.17g}" for j, E in enumerate(spec.eigenvalues)]
    else:
        E_c, alpha = args.window
        win = CriticalWindow(E_c=E_c, alpha=alpha, L=args.L)
        stats = window_spacings(spec, win)
        in_win = set(stats.eigenvalue_indices.tolist())
        flat = dict(zip(stats.eigenvalue_indices.tolist(),
                        zip(stats.flatness_min, stats.flatness_max,
                            stats.C_estimates)))
        lines.append("index,eigenvalue,in_window,flatness_min,flatness_max,C_estimate")
        for j, E in enumerate(spec.eigenvalues):
            if j in in_win:
                mn, mx, c = flat[j]
                lines.append(f"{j},{E:.17g},1,{mn:.17g},{mx:.17g},{c:.17g}")
            else:
                lines.append(f"{j},{E:.17g},0,,,")
        lines.append(f"# window_count {stats.count}")
        lines.append(f"# spacing_ratio {stats.spacing_ratio:.17g}")
        lines.append(f"# C_emp {stats.C_emp:.17g}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


# -- entropy ---------------------------------------------------------------

def cmd_entropy(parser, args) -> int:
    params = _params(parser, args)
    a, b = args.region
    if not (-args.L <= a <= b <= args.L - 1):
        parser.error(f"region [{a}, {b}] outside the box [-{args.L}, {args.L - 1}]")
    A = Region(a, b)
    cfg = sample_config(params, args.L, args.sample)
    spec = eigensystem(build_hamiltonian(cfg, params))
    res = entanglement_entropy(spec, A, args.ef)
    if a < b:
        q_comm = quadratic_entropy_commutator(spec, A, args.ef)
    else:
        q_comm = res.Q  # single-site region: no interior commutator split
    manifest = RunManifest(
        plan_hash=_args_hash({"cmd": "entropy", "L": args.L, "v": args.v,
                              "p_plus": args.p_plus, "seed": args.seed,
                              "sample": args.sample, "ef": args.ef,
                              "region": [a, b], "padded": args.padded,
                              "temp": args.temp}),
        master_seed=args.seed)
    cols = ["L", "E_F", "x1", "x2", "S", "Q", "Q_commutator", "oracle_absdiff"]
    vals = [str(args.L), f"{args.ef:.17g}", str(a), str(b), f"{res.S:.17g}",
            f"{res.Q:.17g}", f"{q_comm:.17g}", f"{abs(res.Q - q_comm):.17g}"]
    if args.temp is not None:
        cols.append("S_smoothed")
        vals.append(f"{fermi_dirac_entropy(spec, A, args.ef, args.temp):.17g}")
    if args.padded is not None:
        if args.padded < args.L:
            parser.error("--padded must be >= --L")
        comp = finite_vs_padded(params, args.sample, A, args.ef,
                                args.L, args.padded)
        cols += ["Q_padded", "trace_norm_diff", "krein_bound_holds", "d_L"]
        vals += [f"{comp['Q_pad']:.17g}", f"{comp['trace_norm_diff']:.17g}",
                 str(int(comp["krein_bound_holds"])), str(comp["d_L"])]
    lines = manifest.header_lines() + [",".join(cols), ",".join(vals)]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


# -- sweep -----------------------------------------------------------------

def _assertion_env(result) -> dict:
    plan = result.plan
    env = {"n_failed": result.n_failed}
    slopes = []
    for E_F in plan.E_F_list:
        fit = result.fits.get(E_F, {})
        slopes.append(fit.get("slope"))
    env["slopes"] = slopes
    env["slope"] = slopes[0]
    crit = {0.0, plan.v}
    for E_F, s in zip(plan.E_F_list, slopes):
        name = "slope_critical" if any(abs(E_F - c) < 1e-12 for c in crit) \
            else "slope_offcritical"
        env.setdefault(name, s)
    return env


def cmd_sweep(parser, args) -> int:
    try:
        plan = SweepPlan.from_file(args.plan)
    except (OSError, ValueError) as exc:
        parser.error(f"cannot load plan {args.plan!r}: {exc}")
    workers = args.workers if args.workers else worker_count()
    result = run_sweep(plan, workers=workers, cache_dir=args.cache_dir)
    manifest = RunManifest(plan_hash=plan.plan_hash(),
                           master_seed=plan.master_seed)
    out_dir = args.out_dir
    os.makedirs(out_dir, exist_ok=True)
    base = os.path.join(out_dir, f"sweep-{plan.plan_hash()}")
    header = "\n".join(manifest.header_lines()) + "\n"
    with open(base + ".csv", "w") as fh:
        fh.write(header)
        fh.write(result.rows_csv())
    with open(base + ".json", "w") as fh:
        fh.write(result.summary_json() + "\n")
    with open(base + ".manifest.json", "w") as fh:
        fh.write(manifest.json_text(timestamp=True) + "\n")
    print(f"wrote {base}.csv, .json, .manifest.json")

    failures = []
    env = _assertion_env(result)
    for expr in plan.assertions:
        try:
            ok = bool(eval(expr, {"__builtins__": {}}, dict(env)))
        except Exception as exc:
            failures.append(f"assert {expr!r}: evaluation error: {exc}")
            continue
        if not ok:
            failures.append(f"assert {expr!r} failed (env: "
                            + json.dumps(env, default=str) + ")")
    for msg in failures:
        print(msg, file=sys.stderr)
    return 1 if failures else 0


# -- entry point -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dimerlab",
        description="Random dimer chain laboratory: spectra, entanglement "
                    "entropy, and disorder-averaged scaling sweeps.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="eigenvalues of one realization")
    sp.add_argument("--L", type=int, required=True, help="box half-width")
    sp.add_argument("--v", type=float, required=True,
                    help="disorder strength in [0, 2)")
    sp.add_argument("--p-plus", type=float, default=0.5)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--sample", type=int, default=0)
    sp.add_argument("--window", nargs=2, type=float, metavar=("EC", "ALPHA"),
                    help="add critical-window spacing/flatness columns")
    sp.add_argument("--boundary", choices=("plain", "dirichlet", "neumann"),
                    default="plain")
    sp.add_argument("--out", default=None, help="output file (default stdout)")

    ep = sub.add_parser("entropy", help="region entropy of one realization")
    ep.add_argument("--L", type=int, required=True)
    ep.add_argument("--v", type=float, required=True)
    ep.add_argument("--p-plus", type=float, default=0.5)
    ep.add_argument("--seed", type=int, required=True)
    ep.add_argument("--sample", type=int, default=0)
    ep.add_argument("--ef", type=float, required=True, help="Fermi energy")
    ep.add_argument("--region", nargs=2, type=int, metavar=("A", "B"),
                    required=True)
    ep.add_argument("--padded", type=int, default=None,
                    help="also compare against the enlarged box of this half-width")
    ep.add_argument("--temp", type=float, default=None,
                    help="add Fermi-Dirac smoothed entropy at this temperature")
    ep.add_argument("--out", default=None)

    wp = sub.add_parser("sweep", help="run a sweep plan file")
    wp.add_argument("--plan", required=True)
    wp.add_argument("--workers", type=int, default=0,
                    help="0 = use DIMERLAB_WORKERS or cpu count")
    wp.add_argument("--out-dir", default="results")
    wp.add_argument("--cache-dir", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    np.seterr(over="raise")
    handlers = {"spectrum": cmd_spectrum, "entropy": cmd_entropy,
                "sweep": cmd_sweep}
    return handlers[args.command](parser, args)


if __name__ == "__main__":
    sys.exit(main())
