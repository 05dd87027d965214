"""Path-space cost of share trajectories and its minimizers.

A scaled path is phi(tau) on [0, 1] (phi(0) = 0, slope in [0, 1]); the share
along it is psi(tau) = phi(tau)/tau.  Steering the walk along phi costs

    J[phi] = integral_0^1 KL( phi'(tau) || pi(phi(tau)/tau) ) dtau  >= 0,

with KL the Bernoulli relative entropy, and the entropy density of ending at
share y is phi_ent(y) = -inf J over admissible paths.  (Equivalently the
integral of -L with L(a, b) = a log(b/a) + (1-a) log((1-b)/(1-a)) <= 0; the
implemented rate is the nonnegative form so minimization is conventional.)

Cost-free paths satisfy psi'(tau) = (pi(psi) - psi)/tau and flow backward
into an unstable fixed point as tau -> 0: the approach is algebraic,
|psi(tau) - y0| ~ C tau^(chi-1) with chi = pi'(y0), so the gap at small tau
shrinks slowly when chi is near 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import InvalidPathError, NonConvergenceError, ResourceLimitError
from .exact import WalkInit, evolve_checkpoints, interval_log_mass
from .urn import Crossing, UrnFunction, fixed_points

__all__ = [
    "Trajectory",
    "bernoulli_kl",
    "neg_bernoulli_kl",
    "path_rate",
    "zero_cost_path",
    "zero_cost_dense",
    "optimal_path",
    "CurrentCheckRow",
    "CurrentCheckReport",
    "current_conservation_check",
]

SLOPE_SLACK = 1e-9  # tolerance on the Lipschitz cone when validating paths


@dataclass(frozen=True)
class Trajectory:
    """A discretized scaled path: shares psi on a tau grid, with its rate."""

    tau: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    rate: float

    @property
    def phi(self) -> np.ndarray:
        return self.tau * self.psi

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        if tau.ndim != 1 or tau.size < 2 or np.any(np.diff(tau) <= 0):
            raise InvalidPathError("tau grid must be strictly increasing, length >= 2")
        if tau[0] <= 0.0 or tau[-1] > 1.0 + 1e-12:
            raise InvalidPathError("tau grid must lie in (0, 1]")


def bernoulli_kl(alpha, beta):
    """KL( Bernoulli(alpha) || Bernoulli(beta) ), elementwise, >= 0.

    Infinite when beta is degenerate and alpha disagrees with it.
    """
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    if np.any((a < -1e-12) | (a > 1.0 + 1e-12)):
        raise ValueError("alpha must lie in [0, 1]")
    a = np.clip(a, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(a > 0.0, a * (np.log(a) - np.log(b)), 0.0)
        t2 = np.where(a < 1.0, (1.0 - a) * (np.log1p(-a) - np.log1p(-b)), 0.0)
    out = np.maximum(t1 + t2, 0.0)
    return float(out) if out.ndim == 0 else out


def neg_bernoulli_kl(alpha, beta):
    """The auxiliary integrand L(alpha, beta) <= 0, zero iff alpha == beta."""
    out = -np.asarray(bernoulli_kl(alpha, beta))
    return float(out) if out.ndim == 0 else out


def path_rate(spec: UrnFunction, tau, phi, *, validate: bool = True) -> float:
    """Nonnegative cost J[phi] of a discretized path, by trapezoid quadrature.

    The cell slope is the secant d(phi)/d(tau); the reinforcement chance is
    evaluated at both cell ends and averaged.  The leading gap (0, tau_0] is
    closed by linear continuation (slope phi_0/tau_0), whose integrand at
    tau -> 0 is KL(s0 || pi(s0)).
    """
    tau = np.asarray(tau, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if tau.shape != phi.shape or tau.ndim != 1 or tau.size < 1:
        raise InvalidPathError("tau and phi must be equal-length 1-d arrays")
    if np.any(np.diff(tau) <= 0) or tau[0] <= 0:
        raise InvalidPathError("tau must be strictly increasing and positive")
    slopes = np.diff(phi) / np.diff(tau)
    s0 = phi[0] / tau[0]
    if validate:
        allsl = np.concatenate([[s0], slopes])
        if np.any(allsl < -SLOPE_SLACK) or np.any(allsl > 1.0 + SLOPE_SLACK):
            raise InvalidPathError(
                f"path slope outside [0, 1]: range [{allsl.min():.3g}, {allsl.max():.3g}]"
            )
    psi = phi / tau
    beta = np.asarray(spec.value(np.clip(psi, 0.0, 1.0)), dtype=float)
    kl_left = bernoulli_kl(np.clip(slopes, 0.0, 1.0), beta[:-1])
    kl_right = bernoulli_kl(np.clip(slopes, 0.0, 1.0), beta[1:])
    total = float(np.sum(0.5 * (kl_left + kl_right) * np.diff(tau)))
    # leading cell [0, tau_0]
    s0c = min(max(s0, 0.0), 1.0)
    k_origin = bernoulli_kl(s0c, float(spec.value(s0c)))
    total += 0.5 * (k_origin + float(bernoulli_kl(s0c, beta[0]))) * tau[0]
    return total


def zero_cost_dense(spec: UrnFunction, y_final: float, eps: float = 1e-8):
    """Backward cost-free flow as a callable psi(tau) on [eps, 1].

    Integrates d(psi)/ds = pi(psi) - psi in log-time s = log(tau) from s = 0
    down to log(eps), which removes the 1/tau singularity; adaptive
    Runge-Kutta at 1e-10 tolerance.
    """
    if not 0.0 < y_final < 1.0:
        raise ValueError("y_final must lie strictly inside (0, 1)")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")

    def rhs(_s, psi):
        v = float(np.clip(psi[0], 0.0, 1.0))
        return [float(spec.value(v)) - v]

    sol = solve_ivp(
        rhs, (0.0, math.log(eps)), [y_final],
        method="DOP853", rtol=1e-10, atol=1e-13, dense_output=True,
    )
    if not sol.success:
        raise NonConvergenceError(f"zero-cost flow integration failed: {sol.message}")

    def psi_of_tau(tau):
        t = np.asarray(tau, dtype=float)
        if np.any((t < eps * (1 - 1e-12)) | (t > 1.0 + 1e-12)):
            raise ValueError("tau outside the integrated range")
        out = sol.sol(np.log(np.clip(t, eps, 1.0)))[0]
        return float(out) if out.ndim == 0 else out

    return psi_of_tau


def zero_cost_path(
    spec: UrnFunction,
    y_final: float,
    *,
    eps: float = 1e-8,
    points: int = 8192,
) -> Trajectory:
    """Cost-free trajectory ending at share y_final, on a geometric tau grid.

    The reported rate is the quadrature cost of the discretized path; for the
    default grid it sits well below 1e-8.
    """
    psi_fn = zero_cost_dense(spec, y_final, eps)
    s = np.linspace(math.log(eps), 0.0, points)
    tau = np.exp(s)
    tau[-1] = 1.0
    psi = np.clip(psi_fn(tau), 0.0, 1.0)
    psi[-1] = y_final
    rate = path_rate(spec, tau, tau * psi, validate=False)
    return Trajectory(tau=tau, psi=psi, rate=rate)


def optimal_path(
    spec: UrnFunction,
    y_final: float,
    grid: tuple[int, int] = (400, 400),
) -> tuple[Trajectory, float]:
    """Minimize the path cost to reach share y_final over the Lipschitz cone.

    Value iteration on the share lattice psi in {0, 1/S, ..., 1} over T
    uniform time slices: for each target level the cell slope alpha runs over
    {0, ..., 1} (S+1 values), the source value is linearly interpolated, and
    the cell cost is the left-endpoint Riemann term dt * KL(alpha || pi).
    On cost ties the largest alpha (lowest-phi predecessor) wins, making the
    output deterministic.  Refining (T, S) can only lower the minimum.

    Returns the minimizing trajectory and its rate (also stored on the
    trajectory).
    """
    if not 0.0 < y_final < 1.0:
        raise ValueError("y_final must lie strictly inside (0, 1)")
    T, S = grid
    if T < 2 or S < 2:
        raise ValueError("grid sizes must be at least 2")
    if T > 4000 or S > 4000:
        raise ResourceLimitError("grid sizes capped at 4000")
    dt = 1.0 / T
    levels = np.linspace(0.0, 1.0, S + 1)
    alphas = np.linspace(1.0, 0.0, S + 1)  # descending: ties pick largest slope
    # first slice: phi = alpha * dt, so psi == alpha and the cost is local
    U = dt * bernoulli_kl(levels, np.asarray(spec.value(levels), dtype=float))
    choices = np.zeros((T, S + 1), dtype=np.int32)
    for t in range(1, T):
        tau, tau_next = t * dt, (t + 1) * dt
        src = (levels[:, None] * tau_next - alphas[None, :] * dt) / tau
        feasible = (src >= -1e-12) & (src <= 1.0 + 1e-12)
        srcc = np.clip(src, 0.0, 1.0)
        beta = np.asarray(spec.value(srcc), dtype=float)
        cost = np.interp(srcc, levels, U) + dt * bernoulli_kl(
            np.broadcast_to(alphas, src.shape), beta
        )
        cost = np.where(feasible, cost, np.inf)
        best = cost.argmin(axis=1)
        choices[t] = best
        U = cost[np.arange(S + 1), best]
    rate = float(np.interp(y_final, levels, U))
    # backtrack with exact slopes, nearest-level choice lookup
    phi = np.empty(T + 1)
    phi[T] = y_final
    for t in range(T, 1, -1):
        tau = t * dt
        j = int(round(np.clip(phi[t] / tau, 0.0, 1.0) * S))
        alpha = alphas[choices[t - 1, j]]
        phi[t - 1] = max(phi[t] - alpha * dt, 0.0)
    phi[0] = 0.0
    tau_grid = np.arange(1, T + 1) * dt
    psi = phi[1:] / tau_grid
    traj = Trajectory(tau=tau_grid, psi=np.clip(psi, 0.0, 1.0), rate=rate)
    return traj, rate


@dataclass(frozen=True)
class CurrentCheckRow:
    N: int
    tau: float
    t_mid: int
    psi1: float
    psi2: float
    log_mass_final: float
    log_mass_mid: float
    discrepancy: float


@dataclass(frozen=True)
class CurrentCheckReport:
    rows: list[CurrentCheckRow]
    max_abs_discrepancy: float
    precondition_met: bool


def current_conservation_check(
    spec: UrnFunction,
    y1: float,
    y2: float,
    pairs: list[tuple[int, float]],
    init: WalkInit | None = None,
    *,
    eps: float = 1e-8,
) -> CurrentCheckReport:
    """Compare interval mass at time N with mass between the transported
    endpoints at time floor(tau N).

    Inside a zero-entropy band probability flows along the cost-free
    trajectories, so P(y_N in (y1, y2)) should match
    P(y_{floor(tau N)} in (psi1(tau), psi2(tau))) where psi_i is the
    cost-free flow ending at y_i.  When (y1, y2) is not inside such a band
    the report is still produced but flagged as not applicable.
    """
    if not 0.0 < y1 < y2 < 1.0:
        raise ValueError("need 0 < y1 < y2 < 1")
    init = init or WalkInit()
    fps = fixed_points(spec)
    downs = [f.location for f in fps if f.crossing is Crossing.DOWN]
    # applicable only inside a zero-entropy band: between two stable points
    precondition = len(downs) >= 2 and min(downs) < y1 and y2 < max(downs)
    psi1_fn = zero_cost_dense(spec, y1, eps)
    psi2_fn = zero_cost_dense(spec, y2, eps)
    by_n: dict[int, list[float]] = {}
    for N, tau in pairs:
        if not 0.0 < tau <= 1.0:
            raise ValueError("tau must lie in (0, 1]")
        by_n.setdefault(int(N), []).append(float(tau))
    rows: list[CurrentCheckRow] = []
    for N, taus in sorted(by_n.items()):
        mids = {max(init.total, int(math.floor(tau * N))): tau for tau in sorted(taus)}
        tabs = evolve_checkpoints(spec, init, sorted(set(mids) | {N}))
        lm_final = interval_log_mass(tabs[N], y1, y2)
        for t_mid, tau in sorted(mids.items()):
            p1 = float(psi1_fn(max(tau, eps)))
            p2 = float(psi2_fn(max(tau, eps)))
            lm_mid = interval_log_mass(tabs[t_mid], min(p1, p2), max(p1, p2))
            rows.append(
                CurrentCheckRow(
                    N=N, tau=tau, t_mid=t_mid, psi1=p1, psi2=p2,
                    log_mass_final=lm_final, log_mass_mid=lm_mid,
                    discrepancy=lm_final - lm_mid,
                )
            )
    worst = max((abs(r.discrepancy) for r in rows), default=0.0)
    return CurrentCheckReport(rows=rows, max_abs_discrepancy=worst, precondition_met=precondition)
