"""Command-line front end.

Subcommands: ``verify`` (full certification suite), ``scan`` (contractivity
scan), ``divisibility`` (interval verdicts + forcing witness), ``sweep``
(theta window) and ``bounds`` (analytic bound chain).  All commands emit
CSV data files plus a JSON summary into --out; CSV output is byte-identical
under a fixed seed, the timestamp lives only in the JSON.

Exit codes: 0 pass, 1 check failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import contractivity, divisibility
from .operators import random_probes
from .qutrit_family import (MapParams, continuity_report, family, load_params)
from .superops import choi_min_eigenvalue
from .tolerances import DEFAULT_SEED, TOL_DERIV, TOL_PSD

CONTINUITY_LADDER = (1e-2, 1e-3, 1e-4)
CONTINUITY_FINAL_GAP = 1e-3
WITNESS_MIN_DISCREPANCY = 1e-6


def _write_json(path: Path, payload: dict) -> None:
    payload = dict(payload)
    payload.setdefault("schema_version", 1)
    payload["generated_at"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _params(args) -> MapParams:
    if getattr(args, "config", None):
        return load_params(args.config)
    return MapParams(theta=args.theta, delta=args.delta)


def _fmt(x: float) -> str:
    return f"{x:.15g}"


def check_continuity(params: MapParams, derivative: bool = False) -> dict:
    """Junction gaps must shrink along the epsilon ladder.

    Map-value gaps additionally must end below an absolute threshold.  The
    derivative gaps of the smooth variant decay like eps^(delta - 1), too
    slowly for any absolute cutoff on a short ladder, so convergence to zero
    is certified by a strictly positive fitted power-law exponent instead.
    """
    report = continuity_report(params, CONTINUITY_LADDER, derivative=derivative)
    ok = True
    for entry in report.values():
        gaps = entry["derivative_gap"] if derivative else entry["gap"]
        if any(b >= a for a, b in zip(gaps, gaps[1:])):
            ok = False
        if derivative:
            if gaps[-1] == 0.0:
                exponent = math.inf
            else:
                exponent = (math.log(gaps[0] / gaps[-1])
                            / math.log(CONTINUITY_LADDER[0] / CONTINUITY_LADDER[-1]))
            entry["fitted_exponent"] = exponent
            if exponent <= 0.02:
                ok = False
        elif gaps[-1] >= CONTINUITY_FINAL_GAP:
            ok = False
    return {"passed": ok, "report": report}


def check_cp_tp(params: MapParams, grid_points: int, n_probes: int,
                seed: int) -> dict:
    fam = family(params)
    grid = np.linspace(0.0, params.t4, grid_points)
    probes = random_probes(3, n_probes, seed).stacked()
    vec_probes = probes.transpose(0, 2, 1).reshape(probes.shape[0], -1)
    traced_in = np.einsum("nii->n", probes)
    worst_choi = math.inf
    worst_tp = 0.0
    for t in grid:
        S = fam(t)
        worst_choi = min(worst_choi, choi_min_eigenvalue(S))
        outs = np.einsum("ab,nb->na", S.matrix, vec_probes)
        traced_out = np.einsum("nkk->n", outs.reshape(probes.shape[0], 3, 3))
        worst_tp = max(worst_tp, float(np.max(np.abs(traced_out - traced_in))))
    return {"passed": worst_choi >= -TOL_PSD and worst_tp <= TOL_PSD,
            "min_choi_eig": worst_choi, "max_trace_error": worst_tp}


def check_forcing(params: MapParams) -> dict:
    witness = divisibility.positive_forcing_witness(family(params),
                                                   params.t3, params.t4)
    if witness is None:
        return {"status": "no-configuration", "passed": False}
    if witness.discrepancy > WITNESS_MIN_DISCREPANCY:
        return {"status": "not-P-divisible", "passed": True,
                "discrepancy": witness.discrepancy}
    return {"status": "inconclusive", "passed": False,
            "discrepancy": witness.discrepancy}


def check_closed_form(params: MapParams) -> dict:
    lam = np.arange(0.0, 10.0 + 1e-9, 0.1)
    tau = np.arange(0.0, 1.0 + 1e-9, 0.01)
    worst = -math.inf
    skipped = 0
    for lv in lam:
        root = np.sqrt(1 + lv ** 2 + 2 * lv * np.cos(2 * params.theta * tau))
        keep = root > 1e-12  # measure-zero singular points are skipped, reported
        skipped += int(np.sum(~keep))
        vals = contractivity.gamma4_derivative_closed_form(
            np.full(int(keep.sum()), lv), tau[keep], params.theta)
        worst = max(worst, float(np.max(vals)))
    result = {"passed": worst <= 1e-12, "max_closed_form_derivative": worst}
    if skipped:
        result["singular_points_skipped"] = skipped
    return result


def cmd_verify(args) -> int:
    params = _params(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fam = family(params)
    smooth = params.delta > 1.0

    checks = {}
    checks["continuity"] = check_continuity(params)
    if smooth:
        checks["derivative-continuity"] = check_continuity(params, derivative=True)
    checks["cp-tp"] = check_cp_tp(params, args.grid, 50, args.seed)
    checks["divisibility"] = check_forcing(params)
    probes = random_probes(3, args.probes, args.seed)
    grid = np.linspace(0.0, params.t4, args.grid, endpoint=False)
    report = contractivity.norm_derivative_scan(fam, probes, grid, k=1,
                                                slack=args.slack)
    report.to_csv(out / "verify_scan.csv")
    checks["contractivity"] = {"passed": report.passed,
                               "max_rderiv": report.max_rderiv,
                               "argmax_t": report.argmax_t}
    checks["contractivity-closed-form"] = check_closed_form(params)

    failing = [name for name, res in checks.items() if not res["passed"]]
    summary = {
        "command": "verify",
        "theta": params.theta,
        "delta": params.delta,
        "seed": args.seed,
        "checks": checks,
        "failing": failing,
        "passed": not failing,
    }
    _write_json(out / "verify_summary.json", summary)
    for name in checks:
        status = "FAIL" if name in failing else "PASS"
        print(f"[{status}] {name}")
    if failing:
        print(f"verification failed: {', '.join(failing)}")
        return 1
    print("verification passed")
    return 0


def cmd_scan(args) -> int:
    params = _params(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dim = 3 * args.k
    probes = random_probes(dim, args.probes, args.seed)
    grid = np.linspace(0.0, params.t4, args.grid, endpoint=False)
    report = contractivity.norm_derivative_scan(family(params), probes, grid,
                                               k=args.k, slack=args.slack)
    report.to_csv(out / "scan.csv")
    summary = report.summary()
    summary["theta"] = params.theta
    summary["command"] = "scan"
    if args.k > 1:
        summary["note"] = "exploratory — no analytic claim for k > 1"
    _write_json(out / "scan_summary.json", summary)
    print(f"max right-derivative {report.max_rderiv:.3e} at t={report.argmax_t}"
          f" (probe {report.argmax_probe}); {'pass' if report.passed else 'fail'}")
    return 0 if report.passed else 1


def cmd_divisibility(args) -> int:
    params = _params(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fam = family(params)
    grid = np.linspace(0.0, params.t4, args.grid)
    rows = divisibility.cp_divisibility_scan(fam, grid)
    _write_csv(out / "divisibility.csv",
               ["s", "t", "definedness", "residual", "choi_min_eig", "verdict"],
               [[_fmt(r["s"]), _fmt(r["t"]), r["definedness"], _fmt(r["residual"]),
                 _fmt(r["choi_min_eig"]), r["verdict"]] for r in rows])
    forcing = check_forcing(params)
    summary = {"command": "divisibility", "theta": params.theta,
               "intervals": len(rows),
               "verdicts": {v: sum(1 for r in rows if r["verdict"] == v)
                            for v in ("CP", "not-CP", "undefined-off-image")},
               "forcing_witness": forcing}
    _write_json(out / "divisibility_summary.json", summary)
    print(f"intervals: {summary['verdicts']}; witness: {forcing['status']}")
    return 0


def cmd_sweep(args) -> int:
    params = _params(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    thetas = np.arange(args.theta_min, args.theta_max + 1e-9, args.theta_step)
    rows = contractivity.theta_window_sweep(
        thetas, np.linspace(0.0, 1.0, 201), np.arange(0.0, 10.0 + 1e-9, 0.1))
    _write_csv(out / "sweep.csv",
               ["theta", "max_deriv", "arg_lambda", "arg_tau", "violation"],
               [[_fmt(r["theta"]), _fmt(r["max_deriv"]), _fmt(r["arg_lambda"]),
                 _fmt(r["arg_tau"]), str(r["violation"]).lower()] for r in rows])
    _write_json(out / "sweep_summary.json",
                {"command": "sweep",
                 "violations": [r["theta"] for r in rows if r["violation"]],
                 "clean": [r["theta"] for r in rows if not r["violation"]]})
    print(f"{sum(r['violation'] for r in rows)} of {len(rows)} thetas violate")
    return 0


def cmd_bounds(args) -> int:
    params = _params(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = contractivity.bound_chain_check(
        params.theta, np.arange(0.005, 1.0 + 1e-9, 0.005))
    _write_csv(out / "bounds.csv",
               ["tau", "sup_derivative", "bound_sqrt", "bound_cos", "bracket",
                "polynomial", "link1", "link2", "link3", "link4"],
               [[_fmt(r["tau"]), _fmt(r["sup_derivative"]), _fmt(r["bound_sqrt"]),
                 _fmt(r["bound_cos"]), _fmt(r["bracket"]), _fmt(r["polynomial"]),
                 str(r["link1"]).lower(), str(r["link2"]).lower(),
                 str(r["link3"]).lower(), str(r["link4"]).lower()]
                for r in result["rows"]])
    ok = result["chain_ok"] and result["lambda_monotone"] and \
        result["polynomial_nonpositive"]
    _write_json(out / "bounds_summary.json",
                {"command": "bounds", "theta": params.theta,
                 "chain_ok": result["chain_ok"],
                 "polynomial_nonpositive": result["polynomial_nonpositive"],
                 "lambda_monotone": result["lambda_monotone"],
                 "passed": ok})
    print(f"bound chain at theta={params.theta}: {'pass' if ok else 'fail'}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmarkov",
                                     description="dynamical-map certification toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--theta", type=float, default=1.5)
        p.add_argument("--delta", type=float, default=1.0)
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--grid", type=int, default=200)
        p.add_argument("--probes", type=int, default=200)
        p.add_argument("--k", type=int, default=1)
        p.add_argument("--out", default="out")
        p.add_argument("--rate", choices=["default-pole"], default="default-pole")
        p.add_argument("--slack", type=float, default=TOL_DERIV)
        p.add_argument("--config", default=None,
                       help="key=value parameter file (overrides --theta/--delta)")

    p = sub.add_parser("verify", help="run the full certification suite")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scan", help="trace-norm right-derivative scan")
    common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("divisibility", help="interval CP verdicts + forcing witness")
    common(p)
    p.set_defaults(func=cmd_divisibility)

    p = sub.add_parser("sweep", help="theta-window violation sweep")
    common(p)
    p.add_argument("--theta-min", type=float, default=1.0)
    p.add_argument("--theta-max", type=float, default=1.7)
    p.add_argument("--theta-step", type=float, default=0.05)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bounds", help="analytic bound-chain ledger")
    common(p)
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
