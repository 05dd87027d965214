import numpy as np
import pytest

from erwalk import MajorityMemory, WalkInit, evolve_checkpoints


class TableCache:
    """Session cache of exact tables; one forward sweep serves many tests."""

    def __init__(self):
        self._store = {}

    def get(self, k, p, sizes, init=(2, 1)):
        sizes = tuple(sorted(sizes))
        key = (k, p, init)
        have = self._store.setdefault(key, {})
        missing = [n for n in sizes if n not in have]
        if missing:
            top = max(missing)
            needed = sorted({n for n in sizes if n not in have} | {top})
            tabs = evolve_checkpoints(MajorityMemory(k, p), WalkInit(*init), needed)
            have.update(tabs)
        return [have[n] for n in sizes]


@pytest.fixture(scope="session")
def dp_cache():
    return TableCache()


def brute_force_log_probs(spec, init, N):
    """Log-probability of every count at time N by enumerating all paths."""
    M, m = init.total, init.positive
    steps = N - M
    out = np.full(N + 1, -np.inf)
    if steps == 0:
        out[m] = 0.0
        return out
    codes = np.arange(2**steps, dtype=np.uint64)
    bits = ((codes[:, None] >> np.arange(steps, dtype=np.uint64)[None, :]) & 1).astype(bool)
    log_w = np.zeros(codes.size)
    n = np.full(codes.size, m, dtype=np.int64)
    for j, t in enumerate(range(M, N)):
        q = np.asarray(spec.value(n / t), dtype=float)
        with np.errstate(divide="ignore"):
            log_w += np.where(bits[:, j], np.log(q), np.log1p(-q))
        n += bits[:, j]
    from scipy.special import logsumexp

    for count in range(m, m + steps + 1):
        sel = log_w[n == count]
        if sel.size:
            out[count] = logsumexp(sel)
    return out
