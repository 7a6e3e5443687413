"""Information-flow analysis via trace-norm contractivity.

Right-derivative scans of t -> ||Lambda_t(X)||_1 over probe ensembles
(optionally with an ancilla of dimension k), the closed-form norm and
derivative of the fourth interpolating family on probes rho_A - lambda*rho_B,
the theta-window tightness sweep, the analytic bound chain and the
lambda <-> 1/lambda reflection identity.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .operators import OperandError, ProbeSet, _richardson
from .qutrit_family import RHO_A, RHO_B, MapParams, gamma_family
from .superops import apply_to_extended
from .tolerances import DEFAULT_H0, TOL_CLOSED_FORM, TOL_DERIV


class SingularPointError(ValueError):
    """Closed-form derivative evaluated at its vanishing-denominator point."""


def lambda_probe(lam: float) -> np.ndarray:
    """The probe rho_A - lam * rho_B (trace 1 - lam)."""
    return RHO_A - lam * RHO_B


@dataclass(frozen=True)
class ScanRow:
    t: float
    probe_id: int
    k: int
    norm: float
    rderiv: float
    verdict: str  # "ok" | "fail"


@dataclass(frozen=True)
class ScanReport:
    rows: tuple
    max_rderiv: float
    argmax_t: float
    argmax_probe: int
    passed: bool
    slack: float
    seed: int
    theta: float
    k: int
    grid_spec: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "probe_id", "k", "norm", "rderiv", "verdict"])
            for row in self.rows:
                writer.writerow([f"{row.t:.12g}", row.probe_id, row.k,
                                 f"{row.norm:.15g}", f"{row.rderiv:.15g}", row.verdict])

    def summary(self) -> dict:
        return {
            "schema_version": 1,
            "max_rderiv": self.max_rderiv,
            "argmax_t": self.argmax_t,
            "argmax_probe": self.argmax_probe,
            "passed": self.passed,
            "slack": self.slack,
            "seed": self.seed,
            "theta": self.theta,
            "k": self.k,
            "grid": self.grid_spec,
        }

    def to_json(self, path, timestamp: bool = True) -> None:
        payload = self.summary()
        if timestamp:
            payload["generated_at"] = time.strftime("%Y-%m-%dT%H:%M:%S")
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")


def norm_derivative_scan(fam, probes: ProbeSet, grid, k: int = 1,
                         slack: float = TOL_DERIV, h0: float = DEFAULT_H0) -> ScanReport:
    """Right-derivative scan of ||(Lambda_t tensor Id_k)(X)||_1.

    ``fam`` is a callable t -> SuperOp on the system factor; for k > 1 the
    probes must live on the product space.  Rows are sorted by (probe, t);
    a row fails when its right derivative exceeds ``slack``.  Probe norms at
    each stencil point are evaluated in one batched eigendecomposition, so
    parallel and serial runs produce identical reports.
    """
    grid = list(grid)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise OperandError("grid must be ascending")
    if k < 1:
        raise OperandError("k must be >= 1")
    stack = probes.stacked()
    n = stack.shape[0]

    def norms_at(t: float) -> np.ndarray:
        S = fam(t)
        out = apply_to_extended(S, stack, k)
        out = (out + np.conj(np.swapaxes(out, -1, -2))) / 2
        return np.abs(np.linalg.eigvalsh(out)).sum(axis=-1)

    norm_rows = np.empty((len(grid), n))
    deriv_rows = np.empty((len(grid), n))
    for gi, t in enumerate(grid):
        f0 = norms_at(t)
        diffs = [(norms_at(t + h) - f0) / h for h in (h0, h0 / 2, h0 / 4)]
        norm_rows[gi] = f0
        deriv_rows[gi] = _richardson(diffs)

    rows = []
    for pid in range(n):
        for gi, t in enumerate(grid):
            rd = float(deriv_rows[gi, pid])
            rows.append(ScanRow(t=float(t), probe_id=pid, k=k,
                                norm=float(norm_rows[gi, pid]), rderiv=rd,
                                verdict="fail" if rd > slack else "ok"))
    flat = deriv_rows.T  # (probe, grid)
    pmax, gmax = np.unravel_index(np.argmax(flat), flat.shape)
    max_rd = float(flat[pmax, gmax])
    return ScanReport(rows=tuple(rows), max_rderiv=max_rd,
                      argmax_t=float(grid[gmax]), argmax_probe=int(pmax),
                      passed=max_rd <= slack, slack=slack, seed=probes.seed,
                      theta=float("nan"), k=k,
                      grid_spec={"points": len(grid), "t_min": float(grid[0]),
                                 "t_max": float(grid[-1]), "h0": h0})


def gamma4_norm_closed_form(lam, tau, theta):
    """||Gamma^(4)_tau(rho_A - lam rho_B)||_1 for lam >= 0 (vectorized)."""
    lam = np.asarray(lam, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if np.any(lam < 0) or np.any(tau < 0) or np.any(tau > 1):
        raise OperandError("need lam >= 0 and tau in [0, 1]")
    root = np.sqrt(1 + lam ** 2 + 2 * lam * np.cos(2 * theta * tau))
    out = 0.5 * ((1 - tau ** 2) * np.abs(lam - 1) + (1 + tau ** 2) * root)
    return float(out) if out.ndim == 0 else out


def gamma4_derivative_closed_form(lam, tau, theta):
    """d/dtau of the closed-form norm above (vectorized, lam >= 0).

    Raises SingularPointError when the square-root denominator vanishes
    (lam = 1 with 2*theta*tau = pi), a measure-zero configuration that grid
    sweeps skip and report.
    """
    lam = np.asarray(lam, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if np.any(lam < 0) or np.any(tau < 0) or np.any(tau > 1):
        raise OperandError("need lam >= 0 and tau in [0, 1]")
    root = np.sqrt(1 + lam ** 2 + 2 * lam * np.cos(2 * theta * tau))
    if np.any(root <= 1e-12):
        raise SingularPointError("vanishing denominator at lam = 1, 2*theta*tau = pi")
    out = (tau * (-np.abs(lam - 1) + root)
           - lam * theta * (1 + tau ** 2) * np.sin(2 * theta * tau) / root)
    return float(out) if out.ndim == 0 else out


def gamma4_norm_numeric(lam: float, tau: float, theta: float) -> float:
    """Full matrix-evaluation oracle for the closed-form norm."""
    from .operators import trace_norm
    params = MapParams(theta=theta)
    return trace_norm(gamma_family(4, tau, params).apply(lambda_probe(lam)))


def theta_window_sweep(theta_grid, tau_grid, lam_grid) -> list:
    """Locate the worst (lam, tau) of the closed-form derivative per theta.

    Rows report the maximum, its location and a violation flag; singular
    grid points are skipped and counted.
    """
    tau = np.asarray(list(tau_grid), dtype=float)
    lam = np.asarray(list(lam_grid), dtype=float)
    rows = []
    for theta in theta_grid:
        best, best_lam, best_tau, skipped = -np.inf, None, None, 0
        for lv in lam:
            root = np.sqrt(1 + lv ** 2 + 2 * lv * np.cos(2 * theta * tau))
            keep = root > 1e-12
            skipped += int(np.sum(~keep))
            if not np.any(keep):
                continue
            vals = gamma4_derivative_closed_form(
                np.full(int(keep.sum()), lv), tau[keep], theta)
            idx = int(np.argmax(vals))
            if vals[idx] > best:
                best, best_lam, best_tau = (float(vals[idx]), float(lv),
                                            float(tau[keep][idx]))
        rows.append({"theta": float(theta), "max_deriv": best,
                     "arg_lambda": best_lam, "arg_tau": best_tau,
                     "violation": best > TOL_CLOSED_FORM,
                     "singular_points_skipped": skipped})
    return rows


def bound_chain_check(theta: float, tau_grid, lam_grid=None) -> dict:
    """Pointwise ledger for the analytic bound chain at a given theta.

    Per tau (for lam >= 1):
      link1: sup over the lam grid of the closed-form derivative <= bound_a,
             where bound_a = tau*sqrt(2 + 2cos(2 theta tau))
                             - (1 + tau^2) (theta/2) sin(2 theta tau);
      link2: bound_a == cos(theta tau) * [2 tau - (1 + tau^2) theta sin(theta tau)]
             (half-angle rewrite, theta in [0, pi/2]);
      link3: the bracketed term <= (2 - theta^2) tau - (theta^2 - theta^4/3) tau^3;
      link4 (only meaningful for theta >= sqrt(2)): the polynomial <= 0.
    Also checks that the bracketed part of the derivative is monotonically
    decreasing in lam, via its lam-derivative on a (lam, theta*tau) grid.
    """
    if not 0.0 <= theta <= math.pi / 2:
        raise OperandError("bound chain is stated for theta in [0, pi/2]")
    tau = np.asarray(list(tau_grid), dtype=float)
    lam = np.asarray(list(lam_grid) if lam_grid is not None else np.arange(1.0, 11.0))
    if np.any(lam < 1.0):
        raise OperandError("bound chain covers lam >= 1")
    tol = 1e-10
    rows = []
    for tv in tau:
        sup = max(float(gamma4_derivative_closed_form(lv, tv, theta)) for lv in lam)
        bound_a = (tv * math.sqrt(max(2 + 2 * math.cos(2 * theta * tv), 0.0))
                   - (1 + tv * tv) * (theta / 2) * math.sin(2 * theta * tv))
        bracket = 2 * tv - (1 + tv * tv) * theta * math.sin(theta * tv)
        bound_b = math.cos(theta * tv) * bracket
        poly = (2 - theta ** 2) * tv - (theta ** 2 - theta ** 4 / 3) * tv ** 3
        rows.append({
            "tau": float(tv),
            "sup_derivative": sup,
            "bound_sqrt": bound_a,
            "bound_cos": bound_b,
            "bracket": bracket,
            "polynomial": poly,
            "link1": sup <= bound_a + tol,
            "link2": abs(bound_a - bound_b) <= tol,
            "link3": bracket <= poly + tol,
            "link4": poly <= tol,
        })
    # lam-monotonicity of the bracketed term: its lam-derivative is
    # -1 + (lam + cos(2 theta tau)) / sqrt(1 + lam^2 + 2 lam cos(2 theta tau)) <= 0.
    mono_ok = True
    worst_mono = -np.inf
    for lv in np.linspace(1.0, 10.0, 37):
        for tv in tau:
            c = math.cos(2 * theta * tv)
            root = math.sqrt(1 + lv * lv + 2 * lv * c)
            val = -1 + (lv + c) / root
            worst_mono = max(worst_mono, val)
            if val > tol:
                mono_ok = False
    chain_ok = all(r["link1"] and r["link2"] and r["link3"] for r in rows)
    negative_ok = all(r["link4"] for r in rows)
    return {"theta": theta, "rows": rows, "chain_ok": chain_ok,
            "polynomial_nonpositive": negative_ok,
            "lambda_monotone": mono_ok, "worst_lambda_derivative": float(worst_mono)}


def lambda_reflection_check(lam: float, tau: float, theta: float,
                            tol: float = 1e-10) -> bool:
    """Reflection identity d(lam) = lam * d(1/lam) for 0 < lam < 1."""
    if not 0.0 < lam < 1.0:
        raise OperandError("reflection check covers 0 < lam < 1")
    lhs = gamma4_derivative_closed_form(lam, tau, theta)
    rhs = lam * gamma4_derivative_closed_form(1.0 / lam, tau, theta)
    return abs(lhs - rhs) <= tol
