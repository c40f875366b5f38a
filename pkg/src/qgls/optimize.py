"""One-dimensional maximisation over an open interval, in log space.

Grand Lebesgue norms, fundamental functions and Tchebychev bounds are all a
sup (or inf) over ``p`` in an open interval ``(a, b)`` that is frequently
approached only at an endpoint.  :func:`sup_open_interval` scans a coarse
grid, polishes the best cell by golden-section search and, when the best
grid point is an end point, pushes toward the endpoint with offsets
``eps, eps/10, eps/100`` and Richardson-extrapolates the limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_EPS_REL = 1e-6
DEFAULT_GRID = 33

# log-space differences below this are treated as rounding noise
_NOISE = 1e-12


def _clean(v: float) -> float:
    return -math.inf if v is None or math.isnan(v) else float(v)


def golden_max(fn: Callable[[float], float], lo: float, hi: float, xtol: float):
    """Golden-section search for a maximum of ``fn`` on ``[lo, hi]``.

    Returns ``(x, fn(x))`` for the best point visited.
    """
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = _clean(fn(c)), _clean(fn(d))
    best = max((fc, c), (fd, d))
    while hi - lo > xtol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = _clean(fn(c))
            best = max(best, (fc, c))
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = _clean(fn(d))
            best = max(best, (fd, d))
        if fc == math.inf or fd == math.inf:
            break
    return best[1], best[0]


@dataclass(frozen=True)
class SupResult:
    """Outcome of :func:`sup_open_interval` (all values in log space)."""

    log_value: float
    argmax: float
    endpoint: Optional[str]  # None, "a" or "b": supremum only reached in the limit
    grid: tuple[float, ...]
    log_profile: tuple[float, ...]

    @property
    def value(self) -> float:
        return math.exp(self.log_value) if self.log_value < 709.0 else math.inf


def sup_open_interval(
    log_fn: Callable[[float], float],
    a: float,
    b: float,
    *,
    eps_rel: float = DEFAULT_EPS_REL,
    n_grid: int = DEFAULT_GRID,
    extra_nodes: Iterable[float] = (),
    xtol_rel: float = 1e-9,
) -> SupResult:
    """Supremum of ``log_fn`` over the open interval ``(a, b)``.

    Returns ``+inf`` when the profile is infinite somewhere or grows without
    bound toward an endpoint, ``-inf`` when it is ``-inf`` everywhere.
    """
    eps = eps_rel * (b - a)
    grid = np.linspace(a + eps, b - eps, n_grid)
    extra = [p for p in extra_nodes if a + eps <= p <= b - eps]
    if extra:
        grid = np.unique(np.concatenate([grid, extra]))
    vals = np.array([_clean(log_fn(float(p))) for p in grid])
    grid_t, prof_t = tuple(grid.tolist()), tuple(vals.tolist())

    if np.any(vals == math.inf):
        i = int(np.argmax(vals))
        return SupResult(math.inf, float(grid[i]), None, grid_t, prof_t)
    if np.all(vals == -math.inf):
        return SupResult(-math.inf, float(grid[0]), None, grid_t, prof_t)

    n = len(grid)
    i = int(np.argmax(vals))
    best = (float(vals[i]), float(grid[i]), None)

    lo_i, hi_i = max(i - 1, 0), min(i + 1, n - 1)
    x, fx = golden_max(log_fn, float(grid[lo_i]), float(grid[hi_i]), xtol_rel * (b - a))
    if fx > best[0]:
        best = (fx, x, None)

    if i in (0, n - 1):
        side = "a" if i == 0 else "b"
        sign = 1.0 if i == 0 else -1.0
        end = a if i == 0 else b
        pts = [end + sign * eps * 10.0 ** (-k) for k in (1, 2)]
        v0 = float(vals[i])
        v1, v2 = (_clean(log_fn(p)) for p in pts)
        if math.inf in (v1, v2):
            return SupResult(math.inf, end, side, grid_t, prof_t)
        for p, v in zip(pts, (v1, v2)):
            if v > best[0]:
                best = (v, p, None)
        d1, d2 = v1 - v0, v2 - v1
        if d1 > _NOISE * (1 + abs(v0)) and d2 > _NOISE * (1 + abs(v1)):
            if d2 >= 0.5 * d1 and d2 > 1e-8:
                return SupResult(math.inf, end, side, grid_t, prof_t)
            limit = v2 + d2 / 9.0
            if limit > best[0]:
                best = (limit, end, side)

    return SupResult(best[0], best[1], best[2], grid_t, prof_t)


def inf_open_interval(log_fn, a, b, **kw) -> SupResult:
    """Infimum counterpart of :func:`sup_open_interval` (result negated back)."""
    r = sup_open_interval(lambda p: -log_fn(p), a, b, **kw)
    return SupResult(-r.log_value, r.argmax, r.endpoint, r.grid, tuple(-v for v in r.log_profile))
