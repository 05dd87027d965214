"""Region classification of the (p, x) plane for majority-memory walks.

Above the destabilization threshold p_c the symmetric point turns unstable
and two outer attractors appear; between them the entropy density vanishes,
so interval probabilities decay polynomially instead of exponentially.  The
scan materializes that structure cell by cell: attractor and unstable
curves, the zero-entropy band, and the negative-entropy bulk, with marker
flags where a row crosses p*, p_c or p**.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import ResourceLimitError
from .urn import Crossing, CriticalParams, MajorityMemory, critical_params, fixed_points

__all__ = ["Region", "PhaseCell", "attractors", "classify", "scan"]

MAX_GRID = 2000  # per-axis cap on scan sizes


class Region(Enum):
    NEGATIVE_ENTROPY = "negative_entropy"
    ZERO_ENTROPY_PLATEAU = "zero_entropy_plateau"
    CRITICAL_LINE = "critical_line"
    ATTRACTOR = "attractor"
    UNSTABLE_LINE = "unstable_line"


@dataclass(frozen=True)
class PhaseCell:
    p: float
    x: float
    region: Region
    is_p_star: bool = False
    is_p_c: bool = False
    is_p_double_star: bool = False


@lru_cache(maxsize=64)
def _critical_cached(k: int) -> CriticalParams:
    return critical_params(k)


def attractors(k: int, p: float) -> list[float]:
    """x-coordinates of the stable (down-crossing) fixed points."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    fps = fixed_points(MajorityMemory(k, p))
    return [2.0 * f.location - 1.0 for f in fps if f.crossing is Crossing.DOWN]


def _row_classify(k, p, x_arr, x_tol, p_tol):
    cp = _critical_cached(k)
    fps = fixed_points(MajorityMemory(k, p))
    regions = np.full(x_arr.shape, Region.NEGATIVE_ENTROPY, dtype=object)

    plateau_hi = None
    downs = [f for f in fps if f.crossing is Crossing.DOWN]
    if cp.p_c is not None and p > cp.p_c and len(downs) >= 2:
        plateau_hi = 2.0 * max(f.location for f in downs) - 1.0
        inside = np.abs(x_arr) < plateau_hi - x_tol
        regions[inside] = Region.ZERO_ENTROPY_PLATEAU

    for f in fps:
        xf = 2.0 * f.location - 1.0
        on_curve = np.abs(np.abs(x_arr) - abs(xf)) <= x_tol if xf != 0.0 else np.abs(x_arr) <= x_tol
        if not np.any(on_curve):
            continue
        if f.crossing is Crossing.UP:
            regions[on_curve] = Region.UNSTABLE_LINE
        elif abs(xf) <= x_tol:
            regions[on_curve] = Region.CRITICAL_LINE
        else:
            regions[on_curve] = Region.ATTRACTOR

    mark_star = cp.p_star is not None and abs(p - cp.p_star) <= p_tol
    mark_c = cp.p_c is not None and abs(p - cp.p_c) <= p_tol
    mark_dstar = cp.p_double_star is not None and abs(p - cp.p_double_star) <= p_tol
    return regions, mark_star, mark_c, mark_dstar


def classify(k: int, p: float, x: float, *, x_tol: float = 1e-9, p_tol: float = 1e-9) -> PhaseCell:
    """Region of a single (p, x) point.

    Curves are measure-zero, so membership is decided within ``x_tol``
    (callers scanning a grid pass half a grid step).  Classification depends
    on |x| only, which makes the x -> -x symmetry exact.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if abs(x) > 1.0:
        raise ValueError("x must lie in [-1, 1]")
    regions, ms, mc, md = _row_classify(k, p, np.array([float(x)]), x_tol, p_tol)
    return PhaseCell(
        p=p, x=x, region=regions[0], is_p_star=ms, is_p_c=mc, is_p_double_star=md
    )


def scan(k: int, p_grid, x_grid) -> list[PhaseCell]:
    """Classify every grid point, row-major in (p, x).

    Curve membership uses half the local grid step per axis, so plotted
    cells line up with the attractor curves to one-cell accuracy.
    """
    p_grid = np.atleast_1d(np.asarray(p_grid, dtype=float))
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    if p_grid.size > MAX_GRID or x_grid.size > MAX_GRID:
        raise ResourceLimitError(f"scan grids capped at {MAX_GRID} per axis")
    if np.any((p_grid <= 0.0) | (p_grid >= 1.0)):
        raise ValueError("p grid must lie inside (0, 1)")
    if np.any(np.abs(x_grid) > 1.0):
        raise ValueError("x grid must lie in [-1, 1]")
    x_tol = 0.5 * float(np.min(np.diff(x_grid))) if x_grid.size > 1 else 1e-9
    p_tol = 0.5 * float(np.min(np.diff(p_grid))) if p_grid.size > 1 else 1e-9
    cells: list[PhaseCell] = []
    for p in p_grid:
        regions, ms, mc, md = _row_classify(k, float(p), x_grid, x_tol, p_tol)
        for x, reg in zip(x_grid, regions):
            cells.append(
                PhaseCell(
                    p=float(p), x=float(x), region=reg,
                    is_p_star=ms, is_p_c=mc, is_p_double_star=md,
                )
            )
    return cells
