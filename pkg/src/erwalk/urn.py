"""Urn functions for memory-reinforced walks, their fixed points and thresholds.

A two-color urn with reinforcement map pi drives the walk: given a current
fraction y of positive steps, the next step is positive with probability
pi(y).  The supported maps are

* ``MajorityMemory(k, p)`` -- draw k past steps (k odd, with replacement),
  copy the majority sign with probability p: pi(y) = (1-p) + (2p-1) P_k(y)
  with P_k the majority probability of k Bernoulli(y) draws;
* ``LinearUrn(a, b)`` -- pi(y) = a + b y;
* ``KgwUrn(J)`` -- pi(y) = (1 + tanh(J (2y-1))) / 2, the tanh-shaped map of
  irreversible-growth models;
* ``StepLimitUrn(p)`` -- the k -> infinity limit of MajorityMemory: a step
  function jumping from 1-p to p at y = 1/2 (value 1/2 at the jump).

Fixed points of pi(y) = y are the candidate limits of the share process.  A
fixed point is stable when pi crosses the diagonal from above (down-crossing,
slope < 1) and unstable at an up-crossing (slope > 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .errors import NonConvergenceError, NotDifferentiableError, UnsupportedUrnError

__all__ = [
    "Crossing",
    "FixedPoint",
    "CriticalParams",
    "MajorityMemory",
    "LinearUrn",
    "KgwUrn",
    "StepLimitUrn",
    "majority_prob",
    "majority_prob_slope",
    "fixed_points",
    "critical_params",
    "x_from_y",
    "y_from_x",
]

CROSSING_TOL = 1e-9  # slope-vs-1 tolerance for classifying crossings
INVERSE_TOL = 1e-12  # |pi(y) - q| guarantee of .inverse()


class Crossing(Enum):
    DOWN = "down"  # stable: slope < 1
    UP = "up"  # unstable: slope > 1
    TANGENT = "tangent"


@dataclass(frozen=True)
class FixedPoint:
    """A solution of pi(y) = y with its local slope and crossing type."""

    location: float
    derivative: float
    crossing: Crossing

    @property
    def stable(self) -> bool:
        return self.crossing is Crossing.DOWN


@dataclass(frozen=True)
class CriticalParams:
    """Memory-parameter thresholds of a majority-memory walk.

    ``p_star``: slope of pi at the symmetric point reaches 1/2 (fluctuation
    regime change).  ``p_c``: that slope reaches 1 (the symmetric point turns
    unstable; absent for k = 1).  ``p_double_star``: slope at the outer
    attractor comes back down to 1/2 (absent for k = 1).
    """

    p_star: float | None
    p_c: float | None = None
    p_double_star: float | None = None


def x_from_y(y):
    """Map a share y in [0, 1] to a mean step x in [-1, 1] via x = 2y - 1."""
    y = np.asarray(y, dtype=float)
    if np.any((y < 0.0) | (y > 1.0)):
        raise ValueError("y must lie in [0, 1]")
    out = 2.0 * y - 1.0
    return float(out) if out.ndim == 0 else out


def y_from_x(x):
    """Inverse of :func:`x_from_y`: y = (1 + x) / 2."""
    x = np.asarray(x, dtype=float)
    if np.any((x < -1.0) | (x > 1.0)):
        raise ValueError("x must lie in [-1, 1]")
    out = 0.5 * (1.0 + x)
    return float(out) if out.ndim == 0 else out


def _check_unit(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if np.any((y < 0.0) | (y > 1.0)):
        raise ValueError("argument must lie in [0, 1]")
    return y


def _scalar_like(out: np.ndarray, template) -> float | np.ndarray:
    return float(out) if np.ndim(template) == 0 else out


def _majority_tail(y: np.ndarray, k: int) -> np.ndarray:
    """Upper-tail binomial sum from h = (k+1)/2 to k at success chance y."""
    h0 = (k + 1) // 2
    s = np.zeros_like(y)
    for h in range(h0, k + 1):
        s = s + math.comb(k, h) * y**h * (1.0 - y) ** (k - h)
    return s


def majority_prob(k: int, y):
    """Chance that k independent draws, each positive with probability y,
    produce a positive majority.

    k must be odd so ties cannot occur.  Evaluated in the symmetrized form
    1/2 + (T(y) - T(1-y)) / 2 with T the upper-tail sum, which makes the
    identity P_k(1-y) = 1 - P_k(y) hold to the last bit.  Safe for k up to
    99 (coefficients stay far below float overflow).
    """
    if not isinstance(k, (int, np.integer)) or k < 1 or k % 2 == 0:
        raise ValueError("k must be an odd positive integer")
    y = _check_unit(y)
    out = 0.5 + 0.5 * (_majority_tail(y, k) - _majority_tail(1.0 - y, k))
    return _scalar_like(np.clip(out, 0.0, 1.0), y)


def majority_prob_slope(k: int, y):
    """d/dy of :func:`majority_prob`: m C(k, m) (y (1-y))^((k-1)/2), m = (k+1)/2."""
    if not isinstance(k, (int, np.integer)) or k < 1 or k % 2 == 0:
        raise ValueError("k must be an odd positive integer")
    y = _check_unit(y)
    m = (k + 1) // 2
    coef = m * math.comb(k, m)
    out = coef * (y * (1.0 - y)) ** ((k - 1) // 2)
    return _scalar_like(out, y)


class UrnFunction:
    """Shared behavior of the urn-function variants; subclasses fill in
    value/derivative and may override inverse with a closed form."""

    def value(self, y):
        raise NotImplementedError

    def derivative(self, y):
        raise NotImplementedError

    @property
    def monotone(self) -> bool:
        """Strictly monotone on [0, 1] (in either direction)."""
        return False

    @property
    def increasing(self) -> bool:
        return self.monotone and self.value(1.0) > self.value(0.0)

    def range(self) -> tuple[float, float]:
        lo, hi = float(self.value(0.0)), float(self.value(1.0))
        return (lo, hi) if lo <= hi else (hi, lo)

    def inverse(self, q):
        """The unique y in [0, 1] with pi(y) = q, to within 1e-12 residual."""
        if not self.monotone:
            raise UnsupportedUrnError(f"{self!r} is not strictly monotone; no inverse")
        lo, hi = self.range()
        q_arr = np.asarray(q, dtype=float)
        if np.any((q_arr < lo - 1e-12) | (q_arr > hi + 1e-12)):
            raise ValueError(f"q outside the urn-function range [{lo}, {hi}]")
        q_arr = np.clip(q_arr, lo, hi)
        out = self._inverse_clipped(q_arr)
        return _scalar_like(out, q)

    def _inverse_clipped(self, q: np.ndarray) -> np.ndarray:
        sign = 1.0 if self.increasing else -1.0

        def solve_one(qi: float) -> float:
            f = lambda y: sign * (float(self.value(y)) - qi)
            if f(0.0) >= 0.0:
                return 0.0
            if f(1.0) <= 0.0:
                return 1.0
            return brentq(f, 0.0, 1.0, xtol=1e-15, rtol=8.9e-16)

        return np.vectorize(solve_one, otypes=[float])(q)

    def __call__(self, y):
        return self.value(y)


@dataclass(frozen=True)
class MajorityMemory(UrnFunction):
    """k-draw majority reinforcement with memory parameter p."""

    k: int
    p: float

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 1 or self.k % 2 == 0:
            raise ValueError("k must be an odd positive integer")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")

    def value(self, y):
        y = _check_unit(y)
        # 1/2 + (2p-1)(P_k - 1/2): keeps pi(y) + pi(1-y) = 1 exact in floats
        pk = np.asarray(majority_prob(self.k, y), dtype=float)
        out = 0.5 + (2.0 * self.p - 1.0) * (pk - 0.5)
        return _scalar_like(np.clip(out, 0.0, 1.0), y)

    def derivative(self, y):
        y = _check_unit(y)
        out = (2.0 * self.p - 1.0) * np.asarray(majority_prob_slope(self.k, y), dtype=float)
        return _scalar_like(out, y)

    @property
    def monotone(self) -> bool:
        return self.p != 0.5

    def _inverse_clipped(self, q: np.ndarray) -> np.ndarray:
        if self.k == 1:
            return np.clip((q - (1.0 - self.p)) / (2.0 * self.p - 1.0), 0.0, 1.0)
        if self.k == 3:
            return self._inverse_cubic(q)
        return super()._inverse_clipped(q)

    def _inverse_cubic(self, q: np.ndarray) -> np.ndarray:
        # pi(y) = q  <=>  y^3 - 1.5 y^2 + d = 0, d = (q - (1-p)) / (2 (2p-1));
        # trigonometric real-root formula, branch landing in [0, 1].
        p = self.p
        d = (q - (1.0 - p)) / (2.0 * (2.0 * p - 1.0))
        arg = np.clip(-4.0 * (d - 0.25), -1.0, 1.0)
        y = 0.5 + np.cos(np.arccos(arg) / 3.0 - 2.0 * np.pi / 3.0)
        y = np.clip(y, 0.0, 1.0)
        # one Newton polish; skip where the slope vanishes (endpoints)
        slope = np.asarray(self.derivative(y), dtype=float)
        resid = np.asarray(self.value(y), dtype=float) - q
        safe = np.abs(slope) > 1e-12
        y = np.where(safe, y - np.where(safe, resid, 0.0) / np.where(safe, slope, 1.0), y)
        return np.clip(y, 0.0, 1.0)


@dataclass(frozen=True)
class LinearUrn(UrnFunction):
    """pi(y) = a + b y; accepted whenever its range on [0, 1] stays in [0, 1]."""

    a: float
    b: float

    def __post_init__(self):
        ends = (self.a, self.a + self.b)
        if not all(-1e-12 <= e <= 1.0 + 1e-12 for e in ends):
            raise ValueError("linear urn function must map [0, 1] into [0, 1]")

    def value(self, y):
        y = _check_unit(y)
        out = np.clip(self.a + self.b * y, 0.0, 1.0)
        return _scalar_like(out, y)

    def derivative(self, y):
        y = _check_unit(y)
        out = np.full_like(y, self.b, dtype=float)
        return _scalar_like(out, y)

    @property
    def monotone(self) -> bool:
        return self.b != 0.0

    def _inverse_clipped(self, q: np.ndarray) -> np.ndarray:
        return np.clip((q - self.a) / self.b, 0.0, 1.0)


@dataclass(frozen=True)
class KgwUrn(UrnFunction):
    """Tanh-shaped reinforcement pi(y) = (1 + tanh(J (2y - 1))) / 2."""

    J: float

    def value(self, y):
        y = _check_unit(y)
        out = 0.5 * (1.0 + np.tanh(self.J * (2.0 * y - 1.0)))
        return _scalar_like(out, y)

    def derivative(self, y):
        y = _check_unit(y)
        t = np.tanh(self.J * (2.0 * y - 1.0))
        out = self.J * (1.0 - t * t)
        return _scalar_like(out, y)

    @property
    def monotone(self) -> bool:
        return self.J != 0.0

    def _inverse_clipped(self, q: np.ndarray) -> np.ndarray:
        t = np.clip(2.0 * q - 1.0, -1.0, 1.0)
        return np.clip(0.5 * (1.0 + np.arctanh(t) / self.J), 0.0, 1.0)


@dataclass(frozen=True)
class StepLimitUrn(UrnFunction):
    """Infinite-draw limit: pi jumps from 1-p to p at y = 1/2 (1/2 at the jump)."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")

    def value(self, y):
        y = _check_unit(y)
        out = np.where(y > 0.5, self.p, np.where(y < 0.5, 1.0 - self.p, 0.5))
        return _scalar_like(out, y)

    def derivative(self, y):
        y = _check_unit(y)
        if np.any(y == 0.5):
            raise NotDifferentiableError("step urn function has no derivative at y = 1/2")
        out = np.zeros_like(y)
        return _scalar_like(out, y)


def _brent_roots(spec: UrnFunction, grid_points: int = 4097) -> list[float]:
    """All roots of pi(y) - y on [0, 1] by sign-change bracketing."""
    ys = np.linspace(0.0, 1.0, grid_points)
    g = np.asarray(spec.value(ys), dtype=float) - ys
    roots: list[float] = []
    for i in range(grid_points - 1):
        a, b = g[i], g[i + 1]
        if a == 0.0:
            roots.append(float(ys[i]))
        elif a * b < 0.0:
            roots.append(brentq(lambda y: float(spec.value(y)) - y, ys[i], ys[i + 1], xtol=1e-15, rtol=8.9e-16))
    if g[-1] == 0.0:
        roots.append(1.0)
    # merge near-duplicates produced by roots landing on grid nodes
    roots.sort()
    merged: list[float] = []
    for r in roots:
        if not merged or r - merged[-1] > 1e-10:
            merged.append(r)
    return merged


def _classify(spec: UrnFunction, y: float) -> FixedPoint:
    d = float(spec.derivative(y))
    if d < 1.0 - CROSSING_TOL:
        c = Crossing.DOWN
    elif d > 1.0 + CROSSING_TOL:
        c = Crossing.UP
    else:
        c = Crossing.TANGENT
    return FixedPoint(location=y, derivative=d, crossing=c)


def fixed_points(spec: UrnFunction) -> list[FixedPoint]:
    """All solutions of pi(y) = y on [0, 1], sorted, with crossing types.

    MajorityMemory with k = 3 is solved through the factored cubic
    (y - 1/2) * quadratic; the quadratic roots are re-bracketed with Brent's
    method as an independent confirmation.  Other continuous variants use a
    grid scan plus root polishing; the step variant is handled directly from
    its two constant branches.
    """
    if isinstance(spec, StepLimitUrn):
        return _step_fixed_points(spec)
    if isinstance(spec, MajorityMemory) and spec.k == 3:
        return _cubic_fixed_points(spec)
    return [_classify(spec, r) for r in _brent_roots(spec)]


def _step_fixed_points(spec: StepLimitUrn) -> list[FixedPoint]:
    p = spec.p
    if p <= 0.5:
        # single crossing at the jump, from above: stable
        return [FixedPoint(0.5, -math.inf if p < 0.5 else 0.0, Crossing.DOWN)]
    return [
        FixedPoint(1.0 - p, 0.0, Crossing.DOWN),
        FixedPoint(0.5, math.inf, Crossing.UP),
        FixedPoint(p, 0.0, Crossing.DOWN),
    ]


def _cubic_fixed_points(spec: MajorityMemory) -> list[FixedPoint]:
    p = spec.p
    pts = [0.5]
    if p > 5.0 / 6.0:
        # quadratic factor roots y = 1/2 +- sqrt((6p-5)/(2p-1))/2
        s = 0.5 * math.sqrt((6.0 * p - 5.0) / (2.0 * p - 1.0))
        if s > 0.0:
            lo, hi = 0.5 - s, 0.5 + s
            lo, hi = _polish_pair(spec, lo, hi)
            pts = [lo, 0.5, hi]
    return [_classify(spec, y) for y in sorted(pts)]


def _polish_pair(spec: MajorityMemory, lo: float, hi: float) -> tuple[float, float]:
    """Confirm the closed-form quadratic roots by bracketed root-finding."""

    def g(y: float) -> float:
        return float(spec.value(y)) - y

    out = []
    for r in (lo, hi):
        # bracket radius must stay clear of the neighboring root at 1/2
        rad = min(1e-4, 0.4 * abs(r - 0.5))
        a, b = max(0.0, r - rad), min(1.0, r + rad)
        if rad > 1e-12 and g(a) * g(b) < 0.0:
            rb = brentq(g, a, b, xtol=1e-15, rtol=8.9e-16)
            if abs(rb - r) > 1e-9:
                raise NonConvergenceError(
                    f"closed-form root {r} disagrees with bracketed root {rb}"
                )
            out.append(rb)
        else:
            out.append(r)  # root too close to 1/2 to bracket separately
    return out[0], out[1]


def critical_params(k) -> CriticalParams:
    """Thresholds of the k-draw majority walk, found by root-finding to 1e-10.

    ``k = math.inf`` is accepted as the step-function limit, for which the
    symmetric point destabilizes already at p_c = 1/2 and the slope-based
    thresholds p*, p** have no meaning.
    """
    if k == math.inf:
        return CriticalParams(p_star=None, p_c=0.5, p_double_star=None)
    if not isinstance(k, (int, np.integer)) or k < 1 or k % 2 == 0:
        raise ValueError("k must be an odd positive integer (or math.inf)")

    def slope_at_half(p: float) -> float:
        return float(MajorityMemory(k, p).derivative(0.5))

    lo, hi = 0.5 + 1e-13, 1.0 - 1e-13
    p_star = brentq(lambda p: slope_at_half(p) - 0.5, lo, hi, xtol=1e-12)

    p_c = None
    if (slope_at_half(lo) - 1.0) * (slope_at_half(hi) - 1.0) < 0.0:
        p_c = brentq(lambda p: slope_at_half(p) - 1.0, lo, hi, xtol=1e-12)

    p_double_star = None
    if p_c is not None:

        def slope_at_outer(p: float) -> float:
            fps = fixed_points(MajorityMemory(k, p))
            return fps[-1].derivative

        a, b = p_c + 1e-7, 1.0 - 1e-12
        if (slope_at_outer(a) - 0.5) * (slope_at_outer(b) - 0.5) < 0.0:
            p_double_star = brentq(lambda p: slope_at_outer(p) - 0.5, a, b, xtol=1e-12)

    return CriticalParams(p_star=p_star, p_c=p_c, p_double_star=p_double_star)
