"""Cumulant generating function of the share and its Legendre dual.

The normalized transform is

    zeta_N(lambda) = (1/N) log sum_n exp(-lambda n) P(count = n),

and zeta = lim zeta_N (the 1/N factor is required for zeta(0) = 0 and for
the Legendre pairing below; see the README).  zeta is convex, decreasing,
zeta(0) = 0, and tends to log(1 - pi(0)) as lambda grows.

Three routes are implemented and cross-validate each other:

* ``finite_n_cgf``     -- direct transform of an exact distribution table;
* ``cgf_ode``          -- for strictly monotone reinforcement maps, zeta
  solves  d(zeta)/d(lambda) = -pi^{-1}( (1 - e^zeta) / (1 - e^-lambda) ).
  The equation is integrated backward from its large-lambda asymptote
  (forward integration from small lambda is exponentially ill-conditioned:
  perturbations grow like lambda^{1/chi}).  A ``convention="printed"``
  selector exposes the sign placement found in the source equation family,
  which immediately exits the domain of pi^{-1} and raises a diagnostic;
  the shipped default is the self-consistent form above.
* ``cgf_closed_form_k1`` -- exact quadrature solution for the single-draw
  walk.  The closed form determines the shifted function zeta + lambda
  (the transform of the negative-step count); the shift is undone on return.

The entropy density on the right of the symmetric point follows by the
Legendre transform phi(y) = inf_{lambda >= 0} { lambda y + zeta(lambda) },
using the left branch plus the y -> 1-y symmetry of the majority family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.special import logsumexp

from .errors import DomainBreachError, NonConvergenceError, UnsupportedUrnError
from .exact import DistributionTable, EntropyCurve
from .urn import UrnFunction

__all__ = [
    "CgfCurve",
    "default_lambda_grid",
    "finite_n_cgf",
    "cgf_ode",
    "cgf_closed_form_k1",
    "closed_form_curve_k1",
    "legendre_entropy",
    "singular_order",
    "convexity_defect",
]

CONVENTION_STANDARD = "standard"
CONVENTION_PRINTED = "printed"


@dataclass(frozen=True)
class CgfCurve:
    """Sampled zeta(lambda) with the provenance of its computation."""

    lambdas: np.ndarray = field(repr=False)
    zeta: np.ndarray = field(repr=False)
    provenance: str  # "finite_n:<N>" | "ode" | "closed_form_k1"
    convention: str = CONVENTION_STANDARD

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.ndim != 1 or lam.size < 2 or np.any(np.diff(lam) <= 0) or lam[0] < 0:
            raise ValueError("lambda grid must be nonnegative and strictly increasing")


def default_lambda_grid(lo: float = 1e-3, hi: float = 10.0, points: int = 200) -> np.ndarray:
    """Geometric lambda grid; the library-wide default is 1e-3 .. 10, 200 points."""
    if not 0 < lo < hi:
        raise ValueError("need 0 < lo < hi")
    return np.geomspace(lo, hi, points)


def convexity_defect(lambdas: np.ndarray, values: np.ndarray) -> float:
    """Most negative increment of the discrete slope; >= 0 for convex data."""
    sl = np.diff(values) / np.diff(lambdas)
    return float(np.min(np.diff(sl))) if sl.size >= 2 else 0.0


def finite_n_cgf(table: DistributionTable, lambdas=None) -> CgfCurve:
    """Normalized transform (1/N) log sum_n e^{-lambda n} P(n) of a table."""
    lam = np.asarray(default_lambda_grid() if lambdas is None else lambdas, dtype=float)
    lp = table.reachable_log_prob
    n = table.counts
    zeta = np.array([logsumexp(lp - l * n) for l in lam]) / table.N
    return CgfCurve(lambdas=lam, zeta=zeta, provenance=f"finite_n:{table.N}")


def _ode_rhs_standard(spec: UrnFunction, lo: float, hi: float):
    slack = 0.02 * (hi - lo)  # stage wobble clamps; real breaches blow past this

    def rhs(lam: float, z):
        g = math.expm1(z[0]) / math.expm1(-lam)  # (1 - e^zeta)/(1 - e^-lambda)
        if g < lo - slack or g > hi + slack:
            raise DomainBreachError(
                f"inverse-map argument {g:.6g} outside [{lo:.6g}, {hi:.6g}] "
                f"at lambda={lam:.6g}, zeta={z[0]:.6g}"
            )
        return [-float(spec.inverse(min(max(g, lo), hi)))]

    return rhs


def _ode_rhs_printed(spec: UrnFunction, lo: float, hi: float):
    slack = 0.02 * (hi - lo)

    def rhs(lam: float, z):
        g = math.expm1(z[0]) / math.expm1(lam)  # (e^zeta - 1)/(e^lambda - 1)
        if g < lo - slack or g > hi + slack:
            raise DomainBreachError(
                f"printed convention: inverse-map argument {g:.6g} outside "
                f"[{lo:.6g}, {hi:.6g}] at lambda={lam:.6g}, zeta={z[0]:.6g} "
                "(the argument is negative for any zeta < 0 < lambda, so this "
                "sign placement cannot propagate the transform)"
            )
        return [float(spec.inverse(min(max(g, lo), hi)))]

    return rhs


def cgf_ode(
    spec: UrnFunction,
    lambdas=None,
    *,
    convention: str = CONVENTION_STANDARD,
    check_table: DistributionTable | None = None,
    check_tol: float = 1e-3,
) -> CgfCurve:
    """Solve the CGF ODE for a strictly increasing reinforcement map.

    Integration runs backward from lambda_max + margin, seeded with the
    asymptote zeta ~ log(1 - pi(0)) + A e^{-lambda}; the backward flow is
    contracting, so the seed's truncation error is squashed long before the
    requested grid (forward integration would amplify any seed error by many
    orders of magnitude; see module docstring).

    With ``check_table`` the result is compared against the finite-N
    transform of that table and a :class:`NonConvergenceError` carrying a
    convention-mismatch diagnostic is raised beyond ``check_tol``.
    """
    if not spec.monotone or not spec.increasing:
        raise UnsupportedUrnError("the CGF ODE needs a strictly increasing urn function")
    lam = np.asarray(default_lambda_grid() if lambdas is None else lambdas, dtype=float)
    if lam.ndim != 1 or lam[0] <= 0 or np.any(np.diff(lam) <= 0):
        raise ValueError("lambda grid must be positive and strictly increasing")
    pi0, pi1 = float(spec.value(0.0)), float(spec.value(1.0))
    pbar = 1.0 - pi0
    if pbar <= 0.0:
        raise UnsupportedUrnError("pi(0) = 1 leaves no mass in the lower tail")

    slope0 = float(spec.derivative(0.0))
    stiff = slope0 <= 1e-9  # flat-at-0 maps (k >= 3) have an e^lambda-stiff tail
    # the backward flow contracts seed error violently near the start, so the
    # margin only needs to reach the asymptotic regime
    lam_start = lam[-1] + (0.5 if stiff else 4.0)
    a1 = pi0 / pbar if stiff else pi0 / (slope0 + pbar)
    z_start = math.log(pbar) + a1 * math.exp(-lam_start)

    if convention not in (CONVENTION_STANDARD, CONVENTION_PRINTED):
        raise ValueError(f"unknown convention {convention!r}")
    rhs = (_ode_rhs_standard if convention == CONVENTION_STANDARD else _ode_rhs_printed)(
        spec, pi0, pi1
    )
    sol = solve_ivp(
        rhs, (lam_start, lam[0]), [z_start],
        method="Radau" if stiff else "DOP853",
        rtol=1e-10, atol=1e-13, dense_output=True,
        max_step=1.0, first_step=min(0.05 if stiff else 0.25, (lam_start - lam[0]) / 10.0),
    )
    if not sol.success:
        raise NonConvergenceError(f"CGF ODE integration failed: {sol.message}")
    zeta = sol.sol(lam)[0]
    curve = CgfCurve(lambdas=lam, zeta=zeta, provenance="ode", convention=convention)
    if check_table is not None:
        ref = finite_n_cgf(check_table, lam)
        gap = float(np.max(np.abs(ref.zeta - zeta)))
        if gap > check_tol:
            raise NonConvergenceError(
                f"convention mismatch: ODE result deviates from the finite-N "
                f"transform by {gap:.3g} (> {check_tol:g}); the selected sign "
                f"convention {convention!r} does not reproduce the model"
            )
    return curve


def _tail_integral(a: float, gamma: float, beta: float) -> float:
    """log of integral_a^1 t^-gamma (1-t)^-beta dt, endpoint-singularity aware.

    Splits at t = 1/2: the left part is mapped to u = log(t/a) (graceful for
    the steep t^-gamma head when a is tiny), the right part uses weighted
    Gauss-Kronrod quadrature with the algebraic (1-t)^-beta weight.
    """

    def right_piece(lo: float) -> float:
        if beta > 0.0:
            val, _ = quad(
                lambda t: t ** (-gamma), lo, 1.0,
                weight="alg", wvar=(0.0, -beta), epsabs=0.0, epsrel=1e-11, limit=300,
            )
        else:
            val, _ = quad(
                lambda t: t ** (-gamma) * (1.0 - t) ** (-beta), lo, 1.0,
                epsabs=0.0, epsrel=1e-11, limit=300,
            )
        return val

    if a >= 0.5:
        return math.log(right_piece(a))
    head, _ = quad(
        lambda u: math.exp((1.0 - gamma) * u) * (1.0 - a * math.exp(u)) ** (-beta),
        0.0, math.log(0.5 / a), epsabs=0.0, epsrel=1e-11, limit=300,
    )
    log_head = (1.0 - gamma) * math.log(a) + math.log(head)
    return float(np.logaddexp(log_head, math.log(right_piece(0.5))))


def cgf_closed_form_k1(p: float, lam: float) -> float:
    """Exact zeta(lambda) of the single-draw walk by adaptive quadrature.

    Evaluates the closed form for the shifted transform Z(lambda) with

        1 - e^{-Z} = theta e^{theta lambda} (1-e^-lambda)^gamma
                     * integral_{1-e^-lambda}^1 (1-t)^-beta t^-gamma dt,

    gamma = 1/(2p-1), beta = (3p-2) gamma, theta = (1-p) gamma, and returns
    zeta = Z - lambda (Z transforms the negative-step count; both small- and
    large-lambda limits pin the shift).  Relative quadrature error <= 1e-9.
    """
    if not 0.5 < p < 1.0:
        raise ValueError("p must lie in (1/2, 1)")
    if lam <= 0.0:
        raise ValueError("lambda must be positive")
    gamma = 1.0 / (2.0 * p - 1.0)
    beta = (3.0 * p - 2.0) * gamma
    theta = (1.0 - p) * gamma
    a = -math.expm1(-lam)  # 1 - e^-lambda
    log_i = _tail_integral(a, gamma, beta)
    log_a_term = math.log(theta) + theta * lam + gamma * math.log(a) + log_i
    big_a = math.exp(log_a_term)
    if not big_a < 1.0:
        raise NonConvergenceError(
            f"closed-form assembly left (0, 1): A = {big_a!r} at lambda = {lam}"
        )
    return -lam - math.log1p(-big_a)


def closed_form_curve_k1(p: float, lambdas=None) -> CgfCurve:
    """:func:`cgf_closed_form_k1` sampled on a grid."""
    lam = np.asarray(default_lambda_grid() if lambdas is None else lambdas, dtype=float)
    zeta = np.array([cgf_closed_form_k1(p, l) for l in lam])
    return CgfCurve(lambdas=lam, zeta=zeta, provenance="closed_form_k1")


def legendre_entropy(curve: CgfCurve, y_grid, *, refine: bool = True) -> EntropyCurve:
    """Entropy density phi(y) = inf_lambda { lambda y + zeta(lambda) }.

    The transform with lambda >= 0 probes the lower tail (y <= 1/2); values
    right of the symmetric point use the y -> 1-y symmetry of the law, which
    holds for the symmetric reinforcement families this module targets.
    A parabola through the discrete minimizer and its neighbors refines the
    infimum when it is interior.
    """
    lam = curve.lambdas
    zeta = curve.zeta
    defect = convexity_defect(lam, zeta)
    if defect < -1e-8:
        raise ValueError(f"zeta grid is not convex (slope defect {defect:.3g})")
    y_grid = np.atleast_1d(np.asarray(y_grid, dtype=float))
    if np.any((y_grid < 0.0) | (y_grid > 1.0)):
        raise ValueError("y grid must lie in [0, 1]")
    phi = np.empty_like(y_grid)
    for i, y in enumerate(y_grid):
        ye = min(y, 1.0 - y)
        vals = lam * ye + zeta
        j = int(np.argmin(vals))
        best = vals[j]
        if refine and 0 < j < lam.size - 1:
            x0, x1, x2 = lam[j - 1], lam[j], lam[j + 1]
            f0, f1, f2 = vals[j - 1], vals[j], vals[j + 1]
            denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
            if denom != 0.0:
                aa = (x2 * (f1 - f0) + x1 * (f0 - f2) + x0 * (f2 - f1)) / denom
                bb = (x2**2 * (f0 - f1) + x1**2 * (f2 - f0) + x0**2 * (f1 - f2)) / denom
                if aa > 0.0:
                    xv = -bb / (2.0 * aa)
                    if x0 <= xv <= x2:
                        cc = f1 - aa * x1**2 - bb * x1
                        best = min(best, aa * xv**2 + bb * xv + cc)
        # lambda = 0 always competes in the infimum with value zeta(0) = 0
        phi[i] = min(best, 0.0)
    return EntropyCurve(y=y_grid, phi=phi, method=f"legendre:{curve.provenance}")


def singular_order(p: float) -> tuple[int, bool]:
    """Order of the first singular derivative of zeta at 0, ceil(1/(2p-1)),
    and whether 1/(2p-1) is an integer (the logarithmic-correction case)."""
    if not 0.5 < p < 1.0:
        raise ValueError("p must lie in (1/2, 1)")
    v = 1.0 / (2.0 * p - 1.0)
    nearest = round(v)
    is_integer = abs(v - nearest) < 1e-9
    order = nearest if is_integer else math.ceil(v)
    return int(order), bool(is_integer)
