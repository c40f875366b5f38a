"""Grand Lebesgue quasi-norms and the objects built on them.

``||f||_{G psi} = sup_{a<p<b} ||f||_p / psi(p)`` is evaluated in log space by
:func:`qgls.optimize.sup_open_interval`.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, InsufficientDecay, NormDivergent
from .measure import (FunctionRep, HALF_LINE, Indicator, PowerLog, Sampled, TailDefined,
                      UNIT_INTERVAL, add, evaluate_closed, restrict, scaled, sup_abs, to_sampled)
from .optimize import DEFAULT_EPS_REL, DEFAULT_GRID, sup_open_interval
from .psi import ProductPsi, PsiFunction, TabulatedPsi
from .quasinorm import DEFAULT_REL_TOL, QuasiTriangleCertificate, log_lp_quasinorm


@dataclass(frozen=True)
class GlsNormResult:
    value: float
    argmax_p: float
    endpoint_limit: Optional[str]  # "a"/"b" when the sup is only reached in the limit
    profile: tuple  # rows (p, norm, psi, ratio) on the coarse grid

    def to_csv(self) -> str:
        return profile_csv(self.profile)


def profile_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "norm", "psi", "ratio"])
    for row in rows:
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def _psi_nodes(psi: PsiFunction) -> tuple:
    while isinstance(psi, ProductPsi):
        psi = psi.base
    return psi.nodes if isinstance(psi, TabulatedPsi) else ()


def log_norm_function(f: FunctionRep, tol: float = DEFAULT_REL_TOL) -> Callable[[float], float]:
    """``p -> ln ||f||_p``, routing tail-defined functions through the layer-cake integral."""
    if isinstance(f, TailDefined):
        from .tails import log_norm_from_tail

        return lambda p: log_norm_from_tail(f.tail, p, tol)
    return lambda p: log_lp_quasinorm(f, p, tol)


def _safe_exp(x: float) -> float:
    return math.inf if x > 709.0 else math.exp(x)


def gls_norm(f: FunctionRep, psi: PsiFunction, tol: float = DEFAULT_REL_TOL, *,
             eps_rel: float = DEFAULT_EPS_REL, n_grid: int = DEFAULT_GRID,
             log_norm: Optional[Callable[[float], float]] = None) -> GlsNormResult:
    """``sup_{p in (a,b)} ||f||_p / psi(p)``."""
    ln = log_norm or log_norm_function(f, tol)
    cache: dict = {}

    def log_ratio(p):
        if p not in cache:
            cache[p] = ln(p)
        v = cache[p]
        return v if v in (math.inf, -math.inf) else v - float(psi.log_psi(p))

    r = sup_open_interval(log_ratio, psi.a, psi.b, eps_rel=eps_rel, n_grid=n_grid,
                          extra_nodes=_psi_nodes(psi))
    rows = []
    for p, lr in zip(r.grid, r.log_profile):
        lpsi = float(psi.log_psi(p))
        rows.append((p, _safe_exp(cache[p]) if cache[p] > -math.inf else 0.0,
                     math.exp(lpsi), _safe_exp(lr) if lr > -math.inf else 0.0))
    value = 0.0 if r.log_value == -math.inf else r.value
    return GlsNormResult(value, r.argmax, r.endpoint, tuple(rows))


def natural_function(f: FunctionRep, a: float, b: float, grid_size: int = 65,
                     tol: float = DEFAULT_REL_TOL, eps_rel: float = 1e-3 * DEFAULT_EPS_REL) -> TabulatedPsi:
    """Tabulated ``psi_f(p) = ||f||_p`` on ``grid_size`` nodes spanning ``(a, b)``.

    The end nodes sit closer to ``a`` and ``b`` than any point the sup search
    probes, so the search never relies on extrapolated values.
    """
    if not (0.0 < a < b <= 1.0):
        raise DomainError(f"need 0 < a < b <= 1, got ({a}, {b})")
    eps = eps_rel * (b - a)
    nodes = np.linspace(a + eps, b - eps, grid_size)
    ln = log_norm_function(f, tol)
    logs = []
    for p in nodes:
        v = ln(float(p))
        if v == math.inf:
            raise NormDivergent(float(p))
        if v == -math.inf:
            raise DomainError("the zero function has no natural function")
        if v > 709.0:
            raise NormDivergent(float(p), f"||f||_p overflows at p={p}")
        logs.append(v)
    return TabulatedPsi(a, b, tuple(nodes.tolist()), tuple(np.exp(logs).tolist()))


def natural_function_asymptote(f: PowerLog, p):
    """``Gamma(p delta + 1)^(1/p) L(1/(1 - p Delta)) (1 - p Delta)^(-delta - 1/p)``.

    Leading behaviour of ``||f||_p`` as ``p -> 1/Delta`` for the power-log
    family (exact for ``L == 1`` and unit scale).
    """
    from scipy.special import gammaln

    p = np.asarray(p, dtype=float)
    r = 1.0 - p * f.big_delta
    log_v = (gammaln(p * f.delta + 1.0) / p + f.slowly_varying.log(1.0 / r)
             - (f.delta + 1.0 / p) * np.log(r) + math.log(abs(f.scale)))
    return np.exp(log_v)


def fundamental_function(psi: PsiFunction, delta: float, total_mass: float = 1.0) -> float:
    """``phi(delta) = sup_p delta^(1/p) / psi(p)`` for ``0 <= delta <= min(1, mass)``."""
    if not (0.0 <= delta <= min(1.0, total_mass)):
        raise DomainError(f"delta must lie in [0, {min(1.0, total_mass)}], got {delta!r}")
    if delta == 0.0:
        return 0.0
    ld = math.log(delta)
    r = sup_open_interval(lambda p: ld / p - float(psi.log_psi(p)), psi.a, psi.b)
    return r.value


@dataclass(frozen=True)
class FundamentalBoundsReport:
    rows: tuple  # (delta, lower or None, phi, upper, lower_ok, upper_ok)

    @property
    def all_hold(self) -> bool:
        return all(r[4] and r[5] for r in self.rows)


def fundamental_bounds_check(psi: PsiFunction, delta_grid: Sequence[float],
                             rtol: float = 1e-9) -> FundamentalBoundsReport:
    """Check ``delta^(1/a)/sup psi <= phi(delta) <= delta^(1/b)/inf psi`` on a grid.

    The left bound is skipped (reported as ``None``) when ``sup psi`` is infinite.
    """
    lo_psi, hi_psi = psi.inf_psi, psi.sup_psi
    rows = []
    for d in delta_grid:
        if not (0.0 < d <= 1.0):
            raise DomainError("delta values must lie in (0, 1]")
        phi = fundamental_function(psi, d)
        upper = d ** (1.0 / psi.b) / lo_psi
        lower = None if math.isinf(hi_psi) else d ** (1.0 / psi.a) / hi_psi
        lower_ok = lower is None or lower <= phi * (1 + rtol)
        upper_ok = phi <= upper * (1 + rtol)
        rows.append((float(d), lower, phi, upper, lower_ok, upper_ok))
    return FundamentalBoundsReport(tuple(rows))


def gls_quasi_triangle_check(f: FunctionRep, g: FunctionRep, psi: PsiFunction,
                             tol: float = DEFAULT_REL_TOL) -> QuasiTriangleCertificate:
    """``||f+g||_G / (||f||_G + ||g||_G)`` against ``2^(1/a - 1)``."""
    nf, ng = gls_norm(f, psi, tol).value, gls_norm(g, psi, tol).value
    nfg = gls_norm(add(f, g), psi, tol).value
    denom = nf + ng
    ratio = 0.0 if denom == 0 else nfg / denom
    return QuasiTriangleCertificate(psi.a, 2.0 ** (1.0 / psi.a - 1.0), ratio, (f, g))


# --- Boyd indices ---------------------------------------------------------

DEFAULT_BOYD_EXPONENTS = (125, 250, 500, 1000)


def default_s_grid() -> tuple:
    return tuple(2.0 ** -k for k in DEFAULT_BOYD_EXPONENTS) + tuple(2.0 ** k for k in DEFAULT_BOYD_EXPONENTS)


@dataclass(frozen=True)
class BoydEstimate:
    gamma1: float
    gamma2: float
    s_grid: tuple
    log_ratios: tuple  # ln(||sigma_s probe||_G / ||probe||_G) per s
    slopes: dict  # regression details per side


def _fit(x, y, max_residual):
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    spread = np.ptp(y)
    rel = float(np.max(np.abs(resid)) / spread) if spread > 0 else 0.0
    if rel > max_residual:
        raise InsufficientDecay(f"regression residual {rel:.3g} exceeds {max_residual}")
    return {"slope": float(slope), "intercept": float(intercept), "relative_residual": rel,
            "log_s": tuple(map(float, x)), "log_ratio": tuple(map(float, y))}


def boyd_indices(psi: PsiFunction, probe: FunctionRep, s_grid: Optional[Sequence[float]] = None,
                 *, tail_points: int = 3, max_residual: float = 0.05,
                 tol: float = DEFAULT_REL_TOL) -> BoydEstimate:
    """Estimate the Boyd indices of ``G psi`` on the half line from one probe.

    ``||sigma_s f||_p = s^(1/p) ||f||_p`` gives the dilated profile exactly, so
    each ``||sigma_s probe||_G / ||probe||_G`` is a lower bound for the
    dilation operator norm.  The slopes of its logarithm against ``ln s`` over
    the ``tail_points`` smallest and largest ``s`` estimate (gamma1, gamma2).
    """
    if probe.space.kind != HALF_LINE:
        raise DomainError("the Boyd probe must live on the half line")
    s_grid = tuple(default_s_grid() if s_grid is None else s_grid)
    base = log_norm_function(probe, tol)
    cache: dict = {}

    def ln(p):
        if p not in cache:
            cache[p] = base(p)
        return cache[p]

    g0 = gls_norm(probe, psi, tol, log_norm=ln)
    if not (0 < g0.value < math.inf):
        raise DomainError("probe must have a finite nonzero G psi norm")
    log_g0 = math.log(g0.value)

    log_ratios = []
    for s in s_grid:
        if s == 1.0:
            log_ratios.append(0.0)
            continue
        ls = math.log(s)
        r = sup_open_interval(lambda p: ls / p + ln(p) - float(psi.log_psi(p)), psi.a, psi.b)
        log_ratios.append(r.log_value - log_g0)
    ls_arr = np.log(np.array(s_grid))
    lr_arr = np.array(log_ratios)
    small = np.argsort(ls_arr)[:tail_points]
    small = small[ls_arr[small] < 0]
    large = np.argsort(ls_arr)[::-1][:tail_points]
    large = large[ls_arr[large] > 0]
    if len(small) < 2 or len(large) < 2:
        raise DomainError("s_grid needs at least two factors on each side of 1")
    lo_fit = _fit(ls_arr[small], lr_arr[small], max_residual)
    hi_fit = _fit(ls_arr[large], lr_arr[large], max_residual)
    return BoydEstimate(lo_fit["slope"], hi_fit["slope"], s_grid, tuple(log_ratios),
                        {"s_to_0": lo_fit, "s_to_inf": hi_fit})


# --- degenerate dual: the partition construction --------------------------

@dataclass(frozen=True)
class CollapseReport:
    n_values: tuple
    max_piece_norms: tuple
    upper_bounds: tuple
    reconstruction_errors: tuple
    f_norm: float
    f_sup: float
    psi_inf: float

    @property
    def bounds_hold(self) -> bool:
        return all(m <= u * (1 + 1e-9) for m, u in zip(self.max_piece_norms, self.upper_bounds))


def _distribution_key(f: Sampled):
    v = np.abs(f._values)
    w = f.piece_measures
    keep = v > 0
    pairs = sorted(zip(np.round(v[keep], 15).tolist(), np.round(w[keep], 15).tolist()))
    return tuple(pairs)


def collapse_demo(f: FunctionRep, psi: PsiFunction, n_list: Sequence[int],
                  check_points: int = 1000, tol: float = DEFAULT_REL_TOL) -> CollapseReport:
    """Split (0,1) into ``n`` equal intervals and measure ``g_i = n f 1_{A_i}``.

    ``max_i ||g_i||_G`` is compared with ``n^(1-1/b) ||f||_inf / inf psi``,
    which follows from ``||f 1_A||_p <= ||f||_inf mu(A)^(1/p)``; the
    identity ``f = (1/n) sum_i g_i`` is checked on ``check_points`` points.
    """
    if f.space.kind != UNIT_INTERVAL:
        raise DomainError("the partition construction needs the atomless unit interval")
    if not isinstance(f, (Sampled, Indicator)):
        raise DomainError("the construction needs a bounded piecewise-constant f")
    if not psi.b < 1.0:
        raise DomainError("the pieces only shrink when b < 1")
    f_norm = gls_norm(f, psi, tol).value
    f_sup = sup_abs(f)
    psi_inf = psi.inf_psi
    x = (np.arange(check_points) + 0.5) / check_points
    fx = evaluate_closed(to_sampled(f), x)
    cache: dict = {}
    maxima, bounds, recon = [], [], []
    for n in n_list:
        n = int(n)
        if n < 1:
            raise DomainError("partition sizes must be positive")
        edges = np.linspace(0.0, 1.0, n + 1)
        best = 0.0
        acc = np.zeros_like(x)
        for i in range(n):
            piece = scaled(restrict(f, float(edges[i]), float(edges[i + 1])), n)
            acc += evaluate_closed(piece, x)
            key = _distribution_key(piece)
            if key not in cache:
                cache[key] = gls_norm(piece, psi, tol).value
            best = max(best, cache[key])
        maxima.append(best)
        bounds.append(n ** (1.0 - 1.0 / psi.b) * f_sup / psi_inf)
        recon.append(float(np.max(np.abs(acc / n - fx))))
    return CollapseReport(tuple(int(n) for n in n_list), tuple(maxima), tuple(bounds),
                          tuple(recon), f_norm, f_sup, psi_inf)
