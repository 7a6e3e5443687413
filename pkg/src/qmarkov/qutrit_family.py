"""The qutrit dynamical-map family and its building blocks.

Four elementary CP maps E1..E4, interpolating families Gamma1..Gamma4 on
tau in [0, 1], a dephasing generator with an s-dependent rate, and the
piecewise-composed family Lambda_t on [0, t4].  Parameters (rotation angle
theta, junction times, rate functions, smoothing exponent delta) live in an
immutable MapParams and are loadable from a plain key=value config file,
e.g.::

    theta = 1.5
    t1 = 1
    t2 = 2
    t3 = 3
    t4 = 4
    delta = 1.0
    rate = default-pole
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .operators import OperandError
from .superops import SuperOp, compose, from_kraus, superop_from_action

D1 = np.diag([-1.0, 1.0, 1.0])
D2 = np.diag([1.0, -1.0, 1.0])
D3 = np.diag([1.0, 1.0, -1.0])
K2 = np.array([[1.0, 0.0, 0.0],
               [0.0, 1.0, 1.0],
               [0.0, 0.0, 0.0]])
RHO_A = np.diag([1.0, 0.0, 1.0]) / 2
RHO_B = np.diag([0.0, 1.0, 1.0]) / 2
G = np.array([[0.0, -1.0j, 0.0],
              [1.0j, 0.0, 0.0],
              [0.0, 0.0, 0.0]])
KETS = [np.eye(3)[:, i] for i in range(3)]


@dataclass(frozen=True)
class ConstantsTable:
    D1: np.ndarray = field(default_factory=lambda: D1.copy())
    D2: np.ndarray = field(default_factory=lambda: D2.copy())
    D3: np.ndarray = field(default_factory=lambda: D3.copy())
    K2: np.ndarray = field(default_factory=lambda: K2.copy())
    rhoA: np.ndarray = field(default_factory=lambda: RHO_A.copy())
    rhoB: np.ndarray = field(default_factory=lambda: RHO_B.copy())
    G: np.ndarray = field(default_factory=lambda: G.copy())


def rotated_ket(angle: float) -> np.ndarray:
    """exp(i*G*angle)|2>: the generator acts as a y-rotation on the 1-2 block."""
    return np.array([math.sin(angle), math.cos(angle), 0.0], dtype=complex)


@dataclass(frozen=True)
class RateFunction:
    """Rate spec for the interpolating families.

    ``default-pole`` uses gamma(s) = 1/(1-s) with closed-form integral
    g(tau) = -ln(1-tau), and f(tau) = tau^2/(1-tau).  Both diverge at
    tau = 1, which drives the families to their tau=1 limits exactly.
    ``custom-tabulated`` interpolates f linearly from a monotone table on
    [0, 1) (still forced to +inf at tau = 1); gamma may be overridden with a
    callable.
    """

    kind: str = "default-pole"
    table: tuple = ()  # ((tau, f(tau)), ...) for custom-tabulated
    gamma_fn: object = None  # optional callable gamma(s)

    def __post_init__(self):
        if self.kind not in ("default-pole", "custom-tabulated"):
            raise OperandError(f"unknown rate kind {self.kind!r}")
        if self.kind == "custom-tabulated":
            if len(self.table) < 2:
                raise OperandError("custom-tabulated rate needs at least two samples")
            taus = [p[0] for p in self.table]
            vals = [p[1] for p in self.table]
            if taus[0] != 0.0 or vals[0] != 0.0:
                raise OperandError("tabulated f must start at f(0) = 0")
            if any(b <= a for a, b in zip(taus, taus[1:])) or \
               any(b <= a for a, b in zip(vals, vals[1:])):
                raise OperandError("tabulated f must be strictly increasing")

    def f(self, tau: float) -> float:
        if not 0.0 <= tau <= 1.0:
            raise OperandError("tau must lie in [0, 1]")
        if tau == 1.0:
            return math.inf
        if self.kind == "default-pole":
            return tau * tau / (1.0 - tau)
        taus = np.array([p[0] for p in self.table])
        vals = np.array([p[1] for p in self.table])
        if tau > taus[-1]:
            # continue with the last slope toward the pole
            slope = (vals[-1] - vals[-2]) / (taus[-1] - taus[-2])
            return float(vals[-1] + slope * (tau - taus[-1]))
        return float(np.interp(tau, taus, vals))

    def gamma(self, s: float) -> float:
        if self.gamma_fn is not None:
            return float(self.gamma_fn(s))
        if s >= 1.0:
            return math.inf
        return 1.0 / (1.0 - s)

    def g(self, tau: float) -> float:
        """Integral of gamma over [0, tau]."""
        if not 0.0 <= tau <= 1.0:
            raise OperandError("tau must lie in [0, 1]")
        if tau == 1.0:
            return math.inf
        if self.gamma_fn is None:
            return -math.log1p(-tau)
        return float(quad(self.gamma, 0.0, tau, limit=200)[0])


SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class MapParams:
    """All family parameters.

    The junction times are arbitrary ascending positives (equal unit
    segments by default, which makes the per-segment tau mapping trivial).
    theta defaults to 1.5, interior of the monotone-contractivity window
    [sqrt(2), pi/2] and away from both of its tight ends.  delta > 1 smooths
    the time derivative at the junctions by substituting tau -> tau^delta
    inside the rotation argument of the fourth family only.
    """

    theta: float = 1.5
    t1: float = 1.0
    t2: float = 2.0
    t3: float = 3.0
    t4: float = 4.0
    delta: float = 1.0
    gamma_rate: RateFunction = field(default_factory=RateFunction)
    f1_spec: RateFunction = field(default_factory=RateFunction)
    f2_spec: RateFunction = field(default_factory=RateFunction)

    def __post_init__(self):
        if not (0.0 < self.t1 < self.t2 < self.t3 < self.t4):
            raise OperandError("junction times must satisfy 0 < t1 < t2 < t3 < t4")
        if not (0.0 < self.theta < math.pi):
            raise OperandError("theta must lie in (0, pi)")
        if self.delta < 1.0:
            raise OperandError("delta must be >= 1")

    @property
    def in_contractive_window(self) -> bool:
        return SQRT2 <= self.theta <= math.pi / 2


def load_params(path) -> MapParams:
    """Read MapParams from a plain-text key = value file."""
    kwargs = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise OperandError(f"bad config line: {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key == "rate":
                if value != "default-pole":
                    raise OperandError(f"unknown rate {value!r} in config")
            elif key in ("theta", "t1", "t2", "t3", "t4", "delta"):
                kwargs[key] = float(value)
            else:
                raise OperandError(f"unknown config key {key!r}")
    return MapParams(**kwargs)


def make_E(i: int, params: MapParams | None = None) -> SuperOp:
    """The four elementary CP maps (E4 needs theta from ``params``)."""
    params = params or MapParams()
    if i == 1:
        return from_kraus([np.eye(3) / 2, D1 / 2, D2 / 2, D3 / 2])
    if i == 2:
        return from_kraus([K2])
    if i == 3:
        return superop_from_action(
            lambda X: X[0, 0] * RHO_A + X[1, 1] * RHO_B, 3)
    if i == 4:
        return gamma_family(4, 1.0, params)
    raise OperandError(f"map index must be 1..4, got {i}")


def _gamma1_matrix(g_value: float) -> np.ndarray:
    """Coefficient map of exp(g * L0) with L0(X) = sum_i D_i X D_i - 3X.

    In the matrix-unit basis L0 is diagonal: coefficient 0 on diagonal
    units and -4 on off-diagonal ones, so the exponential multiplies
    off-diagonal entries by exp(-4g) and leaves the diagonal alone.  Using
    the closed form keeps the tau -> 1 limit exact (coefficient exactly 0).
    """
    decay = 0.0 if math.isinf(g_value) else math.exp(-4.0 * g_value)
    coeffs = np.empty(9)
    for j in range(3):
        for i in range(3):
            coeffs[j * 3 + i] = 1.0 if i == j else decay
    return np.diag(coeffs).astype(complex)


def dephasing_generator() -> SuperOp:
    """L0(X) = D1 X D1 + D2 X D2 + D3 X D3 - 3X (unit rate)."""
    m = sum(np.kron(D.conj(), D) for D in (D1, D2, D3)) - 3.0 * np.eye(9)
    return SuperOp(dim=3, matrix=m.astype(complex))


def gamma_family(i: int, tau: float, params: MapParams | None = None) -> SuperOp:
    """Gamma^(i)_tau for i in 1..4 and tau in [0, 1]."""
    params = params or MapParams()
    if not 0.0 <= tau <= 1.0:
        raise OperandError("tau must lie in [0, 1]")
    if i == 1:
        return SuperOp(dim=3, matrix=_gamma1_matrix(params.gamma_rate.g(tau)))
    if i in (2, 3):
        rate = params.f1_spec if i == 2 else params.f2_spec
        w = math.exp(-rate.f(tau)) if not math.isinf(rate.f(tau)) else 0.0
        target = make_E(i, params)
        m = w * np.eye(9) + (1.0 - w) * target.matrix
        return SuperOp(dim=3, matrix=m)
    if i == 4:
        # delta-smoothing reparameterizes the whole family as tau -> tau^delta.
        # Substituting only inside the rotation argument would make the norm of
        # the lam = 1 probe behave as (1 + tau^2) cos(theta tau^delta), which
        # grows like tau^2 near tau = 0 for every delta > 1 (norm backflow);
        # the full reparameterization keeps contractivity by the chain rule
        # while still zeroing the right time-derivative at the third junction.
        sigma = tau ** params.delta
        ket = rotated_ket(params.theta * sigma)
        proj1 = np.outer(KETS[0], KETS[0])
        proj_rot = np.outer(ket, ket.conj())
        proj3 = np.outer(KETS[2], KETS[2])
        up, down = 1.0 + sigma * sigma, 1.0 - sigma * sigma

        def action(X):
            return (up * (X[0, 0] * proj1 + X[1, 1] * proj_rot)
                    + down * (X[0, 0] + X[1, 1]) * proj3)

        return superop_from_action(action, 3)
    raise OperandError(f"family index must be 1..4, got {i}")


def lambda_t(t: float, params: MapParams | None = None) -> SuperOp:
    """The piecewise family on [0, t4]; t outside the domain is an error."""
    params = params or MapParams()
    if t < 0.0 or t > params.t4:
        raise OperandError(f"t = {t} outside [0, {params.t4}]")
    if t < params.t1:
        return gamma_family(1, t / params.t1, params)
    if t < params.t2:
        tau = (t - params.t1) / (params.t2 - params.t1)
        return compose(gamma_family(2, tau, params), make_E(1, params))
    if t < params.t3:
        tau = (t - params.t2) / (params.t3 - params.t2)
        return compose(gamma_family(3, tau, params),
                       compose(make_E(2, params), make_E(1, params)))
    tau = (t - params.t3) / (params.t4 - params.t3)
    stack = compose(make_E(2, params), make_E(1, params))
    return compose(gamma_family(4, tau, params), compose(make_E(3, params), stack))


def family(params: MapParams | None = None):
    """Callable t -> Lambda_t with parameters bound."""
    params = params or MapParams()
    return lambda t: lambda_t(t, params)


def continuity_report(params: MapParams | None = None,
                      eps_ladder=(1e-2, 1e-3, 1e-4),
                      derivative: bool = False) -> dict:
    """Sup-norm gaps across each junction for a decreasing epsilon ladder.

    For each junction t in {t1, t2, t3} and each eps, the gap is the
    max-abs entry difference between Lambda_{t-eps} and Lambda_{t+eps}.
    With ``derivative=True`` the report also contains the gap between the
    one-sided finite-difference time derivatives of the matrix entries,
    which should vanish for the smooth (delta > 1, pole-rate) variant.
    """
    params = params or MapParams()
    eps_ladder = tuple(eps_ladder)
    limit = min(params.t1, params.t2 - params.t1,
                params.t3 - params.t2, params.t4 - params.t3) / 2
    if any(not 0.0 < e < limit for e in eps_ladder):
        raise OperandError("epsilon ladder must lie in (0, min segment length / 2)")
    report = {}
    for name, tj in (("t1", params.t1), ("t2", params.t2), ("t3", params.t3)):
        gaps, dgaps = [], []
        for eps in eps_ladder:
            left = lambda_t(tj - eps, params).matrix
            right = lambda_t(tj + eps, params).matrix
            gaps.append(float(np.max(np.abs(left - right))))
            if derivative:
                dleft = (left - lambda_t(tj - 2 * eps, params).matrix) / eps
                dright = (lambda_t(tj + 2 * eps, params).matrix - right) / eps
                dgaps.append(float(np.max(np.abs(dleft - dright))))
        entry = {"eps": eps_ladder, "gap": tuple(gaps)}
        if derivative:
            entry["derivative_gap"] = tuple(dgaps)
        report[name] = entry
    return report
