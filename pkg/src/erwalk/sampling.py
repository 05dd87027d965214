"""Seeded ensemble sampling of reinforced walks.

Two mechanisms produce the same law:

* collapsed -- one uniform per step, increment with probability pi(n/t);
* direct    -- literally draw k past steps (with replacement), take the
  majority sign, follow it with probability p.

Each sample owns a counter-based stream keyed by (master seed, sample index,
mechanism tag), so ensembles are bit-reproducible for a fixed seed no matter
how the work is chunked or threaded.  Per-sample level-crossing counts (the
slowing-down diagnostic) can be collected in the same pass.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from . import rng
from .exact import DistributionTable, WalkInit
from .urn import MajorityMemory, UrnFunction

__all__ = [
    "CrossingSummary",
    "EnsembleResult",
    "sample_walk",
    "sample_walk_direct",
    "ensemble",
    "ensemble_direct",
    "crossing_stats",
    "chi_square_equivalence",
    "total_variation_vs_table",
]

DEFAULT_CHUNK = 16384
_HISTORY_BUDGET = 2**25  # direct-mechanism history bytes per chunk


@dataclass(frozen=True)
class CrossingSummary:
    mean: float
    median: float
    max: int


@dataclass(frozen=True)
class EnsembleResult:
    """Final counts (and optional crossing counts) of a sampled ensemble."""

    spec: UrnFunction
    init: WalkInit
    N: int
    samples: int
    seed: int
    mechanism: str  # "collapsed" | "direct"
    finals: np.ndarray = field(repr=False)
    crossings: np.ndarray | None = field(default=None, repr=False)
    level: float | None = None

    @property
    def histogram(self) -> dict[int, int]:
        vals, cnt = np.unique(self.finals, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, cnt)}

    @property
    def y_final(self) -> np.ndarray:
        return self.finals / self.N

    @property
    def x_final(self) -> np.ndarray:
        return 2.0 * self.finals / self.N - 1.0

    @property
    def crossing_summary(self) -> CrossingSummary | None:
        if self.crossings is None:
            return None
        return CrossingSummary(
            mean=float(self.crossings.mean()),
            median=float(np.median(self.crossings)),
            max=int(self.crossings.max()),
        )


def _collapsed_chunk(spec, init, N, keys, level, t_start):
    S = keys.size
    n = np.full(S, init.positive, dtype=np.int64)
    track = level is not None
    if track:
        cross = np.zeros(S, dtype=np.int64)
        prev = np.sign(n - level * init.total).astype(np.int8)
    for t in range(init.total, N):
        u = rng.uniforms(keys, t)
        n += u < np.asarray(spec.value(n / t), dtype=float)
        if track and t + 1 >= t_start:
            s = np.sign(n - level * (t + 1)).astype(np.int8)
            cross += (s != 0) & (prev != 0) & (s == -prev)
            prev = np.where(s != 0, s, prev)
    return (n, cross) if track else (n, None)


def _direct_chunk(k, p, init, N, keys, level, t_start):
    S = keys.size
    hist = np.zeros((S, N), dtype=bool)
    hist[:, : init.positive] = True  # initial layout: positives first
    n = np.full(S, init.positive, dtype=np.int64)
    rows = np.arange(S)
    track = level is not None
    if track:
        cross = np.zeros(S, dtype=np.int64)
        prev = np.sign(n - level * init.total).astype(np.int8)
    per_step = k + 1
    for t in range(init.total, N):
        base = t * per_step
        votes = np.zeros(S, dtype=np.int64)
        for j in range(k):
            idx = (rng.uniforms(keys, base + j) * t).astype(np.int64)
            votes += hist[rows, idx]
        majority = 2 * votes > k
        follow = rng.uniforms(keys, base + k) < p
        step = majority == follow
        hist[:, t] = step
        n += step
        if track and t + 1 >= t_start:
            s = np.sign(n - level * (t + 1)).astype(np.int8)
            cross += (s != 0) & (prev != 0) & (s == -prev)
            prev = np.where(s != 0, s, prev)
    return (n, cross) if track else (n, None)


def _run_ensemble(kernel, tag, init, N, samples, master_seed, level, t_start, threads, chunk):
    if N < init.total:
        raise ValueError("N must be at least the initial time")
    if samples < 1:
        raise ValueError("need at least one sample")
    t_start = init.total if t_start is None else max(t_start, init.total)
    spans = [(s, min(chunk, samples - s)) for s in range(0, samples, chunk)]

    def work(span):
        start, count = span
        keys = rng.stream_keys(master_seed, tag, start, count)
        return kernel(keys, level, t_start)

    if threads and threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, spans))
    else:
        parts = [work(sp) for sp in spans]
    finals = np.concatenate([p[0] for p in parts])
    crossings = None
    if level is not None:
        crossings = np.concatenate([p[1] for p in parts])
    return finals, crossings


def ensemble(
    spec: UrnFunction,
    init: WalkInit | None = None,
    N: int = 1000,
    samples: int = 10_000,
    master_seed: int = 0,
    *,
    level: float | None = None,
    t_start: int | None = None,
    threads: int | None = None,
    chunk: int = DEFAULT_CHUNK,
) -> EnsembleResult:
    """Sample final counts under the collapsed Bernoulli(pi(y)) mechanism."""
    init = init or WalkInit()

    def kernel(keys, lv, ts):
        return _collapsed_chunk(spec, init, N, keys, lv, ts)

    finals, crossings = _run_ensemble(
        kernel, rng.TAG_COLLAPSED, init, N, samples, master_seed, level, t_start, threads, chunk
    )
    return EnsembleResult(
        spec=spec, init=init, N=N, samples=samples, seed=master_seed,
        mechanism="collapsed", finals=finals, crossings=crossings, level=level,
    )


def ensemble_direct(
    k: int,
    p: float,
    init: WalkInit | None = None,
    N: int = 1000,
    samples: int = 10_000,
    master_seed: int = 0,
    *,
    level: float | None = None,
    t_start: int | None = None,
    threads: int | None = None,
    chunk: int | None = None,
) -> EnsembleResult:
    """Sample final counts under the literal k-draw majority mechanism.

    Distributionally identical to :func:`ensemble` with MajorityMemory(k, p);
    draws are with replacement, so each is positive with chance n/t and the
    majority is reached with probability P_k(n/t).
    """
    spec = MajorityMemory(k, p)  # validates k odd, p in [0, 1]
    init = init or WalkInit()
    if chunk is None:
        chunk = max(256, min(DEFAULT_CHUNK, _HISTORY_BUDGET // max(N, 1)))

    def kernel(keys, lv, ts):
        return _direct_chunk(k, p, init, N, keys, lv, ts)

    finals, crossings = _run_ensemble(
        kernel, rng.TAG_DIRECT, init, N, samples, master_seed, level, t_start, threads, chunk
    )
    return EnsembleResult(
        spec=spec, init=init, N=N, samples=samples, seed=master_seed,
        mechanism="direct", finals=finals, crossings=crossings, level=level,
    )


def sample_walk(
    spec: UrnFunction,
    init: WalkInit | None = None,
    N: int = 1000,
    master_seed: int = 0,
    sample_index: int = 0,
    *,
    trace_stride: int | None = None,
):
    """One collapsed-mechanism walk; returns the final count.

    Pass ``trace_stride`` to also get a thinned (t, count) trace: 0 picks the
    default thinning of one point per ceil(N/1000) steps.  Deterministic in
    (master_seed, sample_index).
    """
    init = init or WalkInit()
    keys = rng.stream_key(master_seed, rng.TAG_COLLAPSED, sample_index)
    n = np.full(1, init.positive, dtype=np.int64)
    trace = None
    stride = 1
    if trace_stride is not None:
        stride = trace_stride if trace_stride > 0 else max(1, int(np.ceil(N / 1000)))
        trace = [(init.total, int(n[0]))]
    for t in range(init.total, N):
        u = rng.uniforms(keys, t)
        n += u < np.asarray(spec.value(n / t), dtype=float)
        if trace is not None and ((t + 1) % stride == 0 or t + 1 == N):
            trace.append((t + 1, int(n[0])))
    final = int(n[0])
    if trace is not None:
        return final, np.asarray(trace, dtype=np.int64)
    return final


def sample_walk_direct(
    k: int,
    p: float,
    init: WalkInit | None = None,
    N: int = 1000,
    master_seed: int = 0,
    sample_index: int = 0,
) -> int:
    """One literal k-draw walk; returns the final count."""
    init = init or WalkInit()
    keys = rng.stream_keys(master_seed, rng.TAG_DIRECT, sample_index, 1)
    finals, _ = _direct_chunk(k, p, init, N, keys, None, init.total)
    return int(finals[0])


def crossing_stats(
    spec: UrnFunction,
    init: WalkInit | None = None,
    N: int = 10_000,
    samples: int = 1000,
    level: float = 0.5,
    master_seed: int = 0,
    *,
    t_start: int | None = None,
    threads: int | None = None,
) -> EnsembleResult:
    """Ensemble with per-sample counts of sign changes of (y_t - level).

    Counts strict sign flips over t = M..N (touches of the level neither
    count nor reset the sign).  ``t_start`` restricts counting to t >=
    t_start, which exposes late-time freezing of the crossings.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    return ensemble(
        spec, init, N, samples, master_seed,
        level=level, t_start=t_start, threads=threads,
    )


def chi_square_equivalence(
    a: EnsembleResult, b: EnsembleResult, *, min_expected: float = 10.0
) -> tuple[float, float, int]:
    """Two-sample chi-square comparison of final-count histograms.

    Pools counts into contiguous bins with at least ``min_expected`` pooled
    entries, then tests homogeneity.  Returns (statistic, p_value, dof).
    """
    lo = int(min(a.finals.min(), b.finals.min()))
    hi = int(max(a.finals.max(), b.finals.max()))
    ca = np.bincount(a.finals - lo, minlength=hi - lo + 1).astype(float)
    cb = np.bincount(b.finals - lo, minlength=hi - lo + 1).astype(float)
    pooled = ca + cb
    bins_a, bins_b = [], []
    acc_a = acc_b = acc = 0.0
    for i in range(pooled.size):
        acc_a += ca[i]
        acc_b += cb[i]
        acc += pooled[i]
        if acc >= min_expected:
            bins_a.append(acc_a)
            bins_b.append(acc_b)
            acc_a = acc_b = acc = 0.0
    if acc > 0:  # fold the remainder into the last bin
        if bins_a:
            bins_a[-1] += acc_a
            bins_b[-1] += acc_b
        else:
            bins_a, bins_b = [acc_a], [acc_b]
    oa = np.asarray(bins_a)
    ob = np.asarray(bins_b)
    na, nb = oa.sum(), ob.sum()
    ra, rb = np.sqrt(nb / na), np.sqrt(na / nb)
    with np.errstate(invalid="ignore"):
        stat = np.nansum((ra * oa - rb * ob) ** 2 / (oa + ob))
    dof = max(len(bins_a) - 1, 1)
    return float(stat), float(stats.chi2.sf(stat, dof)), dof


def total_variation_vs_table(result: EnsembleResult, table: DistributionTable) -> float:
    """Total-variation distance between the empirical law and an exact table."""
    if table.N != result.N:
        raise ValueError("table and ensemble must share N")
    emp = np.bincount(result.finals, minlength=table.N + 1) / result.samples
    lp = table.log_prob
    exact = np.exp(lp - logsumexp(lp[np.isfinite(lp)]))
    return float(0.5 * np.abs(emp - exact).sum())
