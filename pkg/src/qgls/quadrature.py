"""Adaptive Gauss-Kronrod (7/15) quadrature with batched panel bisection.

Integrands are vectorised callables ``fn(x: ndarray) -> ndarray``.  Each
round evaluates every pending panel at once; the panels carrying the
largest error estimates are bisected until the summed ``|K15 - G7|``
estimate meets the tolerance.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureNoConvergence

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])

# full 15-point node set on [-1, 1] and the matching weights
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5]] = _WG[:3]
_GW[[13, 11, 9]] = _WG[:3]
_GW[7] = _WG[3]

_EPS = np.finfo(float).eps


def _gk15(fn, lo: np.ndarray, hi: np.ndarray):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    y = np.asarray(fn(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(y)):
        raise QuadratureNoConvergence("integrand returned a non-finite value")
    k = half * (y @ _KW)
    g = half * (y @ _GW)
    roundoff = 50.0 * _EPS * half * (np.abs(y) @ _KW)
    return k, np.maximum(np.abs(k - g), roundoff)


def integrate(
    fn: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    *,
    rel_tol: float = 1e-10,
    abs_tol: float = 0.0,
    breakpoints: Sequence[float] = (),
    max_panels: int = 20000,
):
    """Integral of ``fn`` over ``[lo, hi]`` (finite).  Returns ``(value, error)``."""
    if hi == lo:
        return 0.0, 0.0
    edges = np.unique(np.array([lo, hi, *[b for b in breakpoints if lo < b < hi]], dtype=float))
    a, b = edges[:-1], edges[1:]
    k, e = _gk15(fn, a, b)
    while True:
        total = float(np.sum(k))
        err = float(np.sum(e))
        tol = max(abs_tol, rel_tol * abs(total))
        if err <= tol:
            return total, err
        if len(a) >= max_panels:
            raise QuadratureNoConvergence(
                f"{len(a)} panels on [{lo}, {hi}]: error {err:.3e} above tolerance {tol:.3e}")
        order = np.argsort(e)[::-1]
        # bisect the worst panels until the untouched remainder fits in tol/4
        remaining = err - np.cumsum(e[order])
        n_split = int(np.searchsorted(-remaining, -0.25 * tol)) + 1
        n_split = min(max(n_split, 1), len(order), max_panels - len(a))
        split = order[:n_split]
        keep = np.ones(len(a), dtype=bool)
        keep[split] = False
        m = 0.5 * (a[split] + b[split])
        na = np.concatenate([a[split], m])
        nb = np.concatenate([m, b[split]])
        nk, ne = _gk15(fn, na, nb)
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        k = np.concatenate([k[keep], nk])
        e = np.concatenate([e[keep], ne])


def integrate_to_infinity(
    fn: Callable[[np.ndarray], np.ndarray],
    lo: float = 0.0,
    *,
    rel_tol: float = 1e-10,
    window: float = 32.0,
    breakpoints: Sequence[float] = (),
    max_windows: int = 60,
    growth_threshold: float = 0.10,
    growth_count: int = 3,
):
    """Integral over ``[lo, inf)`` by successively doubled truncation windows.

    Returns ``(value, error, diverged)``.  The integral is declared divergent
    when ``growth_count`` successive extensions each add more than
    ``growth_threshold`` of the running total.
    """
    total, err = integrate(fn, lo, lo + window, rel_tol=rel_tol, breakpoints=breakpoints)
    left, width = lo + window, window
    growing = 0
    for _ in range(max_windows):
        piece, perr = integrate(fn, left, left + width, rel_tol=rel_tol,
                                abs_tol=0.1 * rel_tol * abs(total), breakpoints=breakpoints)
        grew = abs(piece) > growth_threshold * abs(total)
        total += piece
        err += perr
        growing = growing + 1 if grew else 0
        if growing >= growth_count:
            return math.inf, 0.0, True
        if abs(piece) <= 0.1 * rel_tol * abs(total) or (piece == 0.0 and total == 0.0):
            return total, err + abs(piece), False
        left += width
        width *= 2.0
    raise QuadratureNoConvergence(f"tail of the integral on [{lo}, inf) did not settle")
