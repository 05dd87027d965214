"""Exact law of the positive-step count by forward dynamic programming.

The count n of positive steps among the first t is a Markov chain:

    P(n at t+1) = P(n at t) (1 - pi(n/t)) + P(n-1 at t) pi((n-1)/t),

started from a point mass at (M, m) -- M initial steps of which m positive.
One forward sweep to time N costs O(N^2) and is carried out entirely in log
space so exponentially small tails survive.

On top of the table this module offers interval masses, the finite-N entropy
profile phi_N(y) = log P(y N) / N, its large-N extrapolation, and the
empirical polynomial decay exponent of the mass around an unstable point.

Atoms live on the lattice y = n/N; queries at off-lattice y are matched to
the nearest reachable count (initial steps shift the lattice by m).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import ResourceLimitError
from .urn import Crossing, UrnFunction, fixed_points

__all__ = [
    "WalkInit",
    "DistributionTable",
    "EntropyCurve",
    "evolve",
    "evolve_checkpoints",
    "interval_log_mass",
    "entropy_profile",
    "extrapolated_entropy",
    "decay_exponent",
    "PreconditionWarning",
]

MAX_STEPS = 200_000  # documented cap on N for one evolution

DEFAULT_INIT_TOTAL = 2
DEFAULT_INIT_POSITIVE = 1


class PreconditionWarning(UserWarning):
    """A stated precondition failed; the result is still computed."""


@dataclass(frozen=True)
class WalkInit:
    """Initial condition: ``total`` frozen steps, ``positive`` of them up."""

    total: int = DEFAULT_INIT_TOTAL
    positive: int = DEFAULT_INIT_POSITIVE

    def __post_init__(self):
        if self.total < 1:
            raise ValueError("initial step count must be >= 1")
        if not 0 <= self.positive <= self.total:
            raise ValueError("positive initial steps must lie in [0, total]")


@dataclass(frozen=True)
class DistributionTable:
    """Exact log-probabilities of the positive-step count at time N.

    ``log_prob[n]`` is the natural-log probability of count n; counts outside
    the reachable window [m, m + N - M] are exactly -inf.
    """

    spec: UrnFunction
    init: WalkInit
    N: int
    log_prob: np.ndarray = field(repr=False)

    @property
    def counts(self) -> np.ndarray:
        """Reachable counts m .. m + N - M."""
        return np.arange(self.init.positive, self.init.positive + self.N - self.init.total + 1)

    @property
    def shares(self) -> np.ndarray:
        return self.counts / self.N

    @property
    def reachable_log_prob(self) -> np.ndarray:
        return self.log_prob[self.init.positive : self.init.positive + self.N - self.init.total + 1]

    def log_prob_at(self, y: float) -> float:
        """Log-probability of the reachable atom nearest to share y."""
        i = int(np.argmin(np.abs(self.shares - y)))
        return float(self.reachable_log_prob[i])


@dataclass(frozen=True)
class EntropyCurve:
    """Sampled entropy-density curve phi(y) with its provenance tag."""

    y: np.ndarray
    phi: np.ndarray
    method: str

    def at(self, yq) -> np.ndarray:
        """Values at query points, matched to the nearest sampled y."""
        yq = np.atleast_1d(np.asarray(yq, dtype=float))
        idx = np.abs(self.y[None, :] - yq[:, None]).argmin(axis=1)
        return self.phi[idx]


def _row_iter(spec: UrnFunction, init: WalkInit, N: int):
    """Yield (t, row) with row[j] = log P(count = m + j at time t)."""
    m = init.positive
    row = np.zeros(1)
    yield init.total, row
    for t in range(init.total, N):
        y = (m + np.arange(row.size)) / t
        q = np.asarray(spec.value(y), dtype=float)
        with np.errstate(divide="ignore"):
            lp = np.log(q)
            lq = np.log1p(-q)
        new = np.empty(row.size + 1)
        new[0] = row[0] + lq[0]
        new[-1] = row[-1] + lp[-1]
        if row.size > 1:
            new[1:-1] = np.logaddexp(row[1:] + lq[1:], row[:-1] + lp[:-1])
        row = new
        yield t + 1, row


def _as_table(spec, init, t, row) -> DistributionTable:
    full = np.full(t + 1, -np.inf)
    full[init.positive : init.positive + row.size] = row
    return DistributionTable(spec=spec, init=init, N=t, log_prob=full)


def evolve(
    spec: UrnFunction,
    init: WalkInit | None = None,
    N: int = 1000,
    *,
    check_normalization: bool = False,
    max_steps: int = MAX_STEPS,
) -> DistributionTable:
    """Exact distribution of the count at time N.

    With ``check_normalization`` every intermediate row is verified to sum to
    one (log-sum-exp within 1e-10); roughly doubles the cost.
    """
    init = init or WalkInit()
    if N < init.total:
        raise ValueError(f"N = {N} is below the initial time {init.total}")
    if N > max_steps:
        raise ResourceLimitError(f"N = {N} exceeds the cap of {max_steps} steps")
    for t, row in _row_iter(spec, init, N):
        if check_normalization:
            z = logsumexp(row)
            if abs(z) > 1e-10:
                raise AssertionError(f"normalization drift {z:.3e} at time {t}")
    return _as_table(spec, init, t, row)


def evolve_checkpoints(
    spec: UrnFunction,
    init: WalkInit | None = None,
    times: list[int] | None = None,
    *,
    max_steps: int = MAX_STEPS,
) -> dict[int, DistributionTable]:
    """Tables at several times from a single forward sweep to max(times)."""
    init = init or WalkInit()
    want = sorted(set(times or []))
    if not want:
        raise ValueError("need at least one checkpoint time")
    if want[0] < init.total:
        raise ValueError("checkpoints must not precede the initial time")
    if want[-1] > max_steps:
        raise ResourceLimitError(f"N = {want[-1]} exceeds the cap of {max_steps} steps")
    out: dict[int, DistributionTable] = {}
    want_set = set(want)
    for t, row in _row_iter(spec, init, want[-1]):
        if t in want_set:
            out[t] = _as_table(spec, init, t, row)
    return out


def interval_log_mass(table: DistributionTable, y1: float, y2: float) -> float:
    """log P(y1 < n/N < y2), strict at both ends; -inf when no atom lies inside."""
    if not 0.0 <= y1 < y2 <= 1.0:
        raise ValueError("need 0 <= y1 < y2 <= 1")
    n = np.arange(table.N + 1)
    mask = (n > y1 * table.N) & (n < y2 * table.N)
    sel = table.log_prob[mask]
    sel = sel[np.isfinite(sel)]
    if sel.size == 0:
        return -np.inf
    return float(logsumexp(sel))


def entropy_profile(table: DistributionTable) -> EntropyCurve:
    """Finite-N entropy approximant phi_N(y) = log P(n) / N on the lattice."""
    return EntropyCurve(
        y=table.shares,
        phi=table.reachable_log_prob / table.N,
        method=f"finite_n:{table.N}",
    )


def extrapolated_entropy(tables: list[DistributionTable], y_grid) -> EntropyCurve:
    """Large-N limit of phi_N at each query share.

    Fits phi_N = phi + a log(N)/N + b/N per share over the supplied tables
    (nearest-atom matching), which strips the local-limit-theorem prefactor.
    Needs at least three table sizes.
    """
    if len(tables) < 3:
        raise ValueError("extrapolation needs tables at >= 3 sizes")
    y_grid = np.atleast_1d(np.asarray(y_grid, dtype=float))
    Ns = np.array([t.N for t in tables], dtype=float)
    design = np.column_stack([np.ones_like(Ns), np.log(Ns) / Ns, 1.0 / Ns])
    samples = np.stack(
        [np.array([t.log_prob_at(y) for y in y_grid]) / t.N for t in tables]
    )
    coef, *_ = np.linalg.lstsq(design, samples, rcond=None)
    return EntropyCurve(y=y_grid, phi=coef[0], method="extrapolated")


def _interval_masses(spec, init, y1, y2, n_list):
    tabs = evolve_checkpoints(spec, init, list(n_list))
    return np.array([interval_log_mass(tabs[N], y1, y2) for N in n_list])


def decay_exponent(
    spec: UrnFunction,
    init: WalkInit | None = None,
    y1: float = 0.4,
    y2: float = 0.6,
    n_list: list[int] | None = None,
) -> float:
    """Empirical exponent e with P(y_N in (y1, y2)) ~ N^-e, by least squares.

    The interval should straddle an unstable (up-crossing) fixed point; the
    fitted exponent then estimates pi'(y0) - 1.  If it does not, a
    :class:`PreconditionWarning` is emitted and the fit is returned anyway.
    Plain unweighted least squares of log mass on log N.
    """
    init = init or WalkInit()
    n_list = sorted(n_list or [1000, 2000, 4000, 8000, 16000])
    if len(n_list) < 3:
        raise ValueError("need at least 3 sizes")
    if n_list[-1] < 10 * n_list[0]:
        raise ValueError("sizes should span at least one decade")
    has_up = any(
        fp.crossing is Crossing.UP and y1 < fp.location < y2 for fp in fixed_points(spec)
    )
    if not has_up:
        warnings.warn(
            "no unstable fixed point inside the interval; the polynomial-decay "
            "model does not apply",
            PreconditionWarning,
            stacklevel=2,
        )
    masses = _interval_masses(spec, init, y1, y2, n_list)
    slope = np.polyfit(np.log(np.asarray(n_list, dtype=float)), masses, 1)[0]
    return float(-slope)
