"""Counter-based random streams for reproducible parallel sampling.

Every sample owns a stream keyed by (master seed, sample index), and every
uniform inside a stream is a pure function of (key, counter).  Results are
therefore independent of chunking, worker count and scheduling order: drawing
sample i's step-t uniform never requires having drawn anything else.

The generator is the splitmix64 finalizer applied to an additive counter
sequence (Steele, Lea & Flood).  Streams for distinct purposes (e.g. the
direct and collapsed walk mechanisms) are separated by a domain tag so their
uniforms are unrelated even under the same master seed.
"""

from __future__ import annotations

import numpy as np

_U64 = np.uint64
_GAMMA = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)

# domain tags for derived stream families
TAG_COLLAPSED = 0x636F6C6C61707365  # "collapse"
TAG_DIRECT = 0x6469726563742121  # "direct!!"
TAG_TRACE = 0x7472616365303030

_INV_2_53 = 2.0 ** -53


def mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer; a bijective avalanche on uint64."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _U64(30))) * _MIX1
        z = (z ^ (z >> _U64(27))) * _MIX2
        return z ^ (z >> _U64(31))


def stream_keys(master_seed: int, tag: int, start: int, count: int) -> np.ndarray:
    """Keys for sample streams ``start .. start+count-1``."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    with np.errstate(over="ignore"):
        base = mix64(np.array([np.uint64(master_seed & 0xFFFFFFFFFFFFFFFF) ^ _U64(tag)]))[0]
        idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
        return mix64(base + _GAMMA * idx)


def stream_key(master_seed: int, tag: int, index: int) -> np.ndarray:
    """Single stream key, as a length-1 array (keeps dtype discipline)."""
    return stream_keys(master_seed, tag, index, 1)


def uniforms(keys: np.ndarray, counter: int) -> np.ndarray:
    """One uniform in [0, 1) per stream at the given counter."""
    with np.errstate(over="ignore"):
        v = mix64(keys + _GAMMA * _U64(counter))
    return (v >> _U64(11)) * _INV_2_53


def uint64s(keys: np.ndarray, counter: int) -> np.ndarray:
    """One raw 64-bit word per stream at the given counter."""
    with np.errstate(over="ignore"):
        return mix64(keys + _GAMMA * _U64(counter))
