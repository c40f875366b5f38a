"""Tail functions ``T_f(u) = mu{|f| >= u}`` and their link to L_p quasi-norms.

The layer-cake formula ``||f||_p^p = p int_0^inf u^(p-1) T_f(u) du`` turns a
tail into a norm; Tchebychev's inequality turns norms back into tail bounds.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, EvaluationUnsupported, TailIntegralDivergent
from .gls import gls_norm, log_norm_function
from .measure import FunctionRep, Indicator, PowerLog, Sampled, SlowlyVarying, TailDefined, to_sampled
from .optimize import inf_open_interval
from .psi import PsiFunction, tail_model_psi
from .quadrature import integrate, integrate_to_infinity
from .quasinorm import DEFAULT_REL_TOL, NormResult, _QUAD_FLOOR


class TailFunction:
    """Nonincreasing ``u -> T(u)`` on ``u > 0``."""

    mass: float
    #: T(u) decays like u^-decay_exponent (up to slowly varying factors); None when T has bounded support
    decay_exponent: Optional[float] = None

    def log_tail_at(self, t):
        """``ln T(e^t)``, vectorised."""
        raise NotImplementedError

    def log_excess_at(self, t):
        """``ln T(e^t) + decay_exponent * t``; subclasses avoid the cancellation."""
        return self.log_tail_at(t) + self.decay_exponent * np.asarray(t, dtype=float)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u <= 0):
            raise DomainError("tail functions are defined for u > 0")
        out = np.exp(self.log_tail_at(np.log(u)))
        return float(out) if out.ndim == 0 else out

    def tabulate(self, u_grid) -> tuple:
        return tuple(np.atleast_1d(self(np.asarray(u_grid, dtype=float))).tolist())


@dataclass(frozen=True)
class AnalyticTail(TailFunction):
    """``T(x) = C x^-b (ln x)^gamma L(ln x)`` for large ``x``, flat below.

    The model is used as given from ``x = max(e, x_peak)`` on, where
    ``x_peak`` maximises it (the model increases just above ``e`` whenever
    ``gamma > b``); below that point ``T`` is held at ``min(mass, T(x_peak))``.
    """

    coef: float = 1.0
    b: float = 0.5
    gamma: float = 0.0
    slowly_varying: SlowlyVarying = field(default_factory=SlowlyVarying)
    mass: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.b < 1.0:
            raise DomainError("tail exponent b must lie in (0, 1)")
        if not self.gamma >= 0:
            raise DomainError("gamma must be nonnegative")
        if not (self.coef > 0 and self.mass > 0):
            raise DomainError("coef and mass must be positive")

    @property
    def decay_exponent(self) -> float:
        return self.b

    def _log_model(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return math.log(self.coef) - self.b * t + self.gamma * np.log(t) + self.slowly_varying.log(t)

    @cached_property
    def t_flat(self) -> float:
        """``ln`` of the point where the model takes over from the flat part."""
        def slope(t):
            return -self.b + self.gamma / t + float(self.slowly_varying.dlog(t))

        if slope(1.0) <= 0:
            return 1.0
        hi = 2.0
        while slope(hi) > 0:
            hi *= 2.0
        return brentq(slope, 1.0, hi, xtol=1e-14, rtol=1e-15)

    @cached_property
    def _log_cap(self) -> float:
        return min(float(self._log_model(self.t_flat)), math.log(self.mass))

    def log_tail_at(self, t):
        t = np.asarray(t, dtype=float)
        vals = self._log_model(np.maximum(t, self.t_flat))
        return np.minimum(vals, self._log_cap)

    def log_excess_at(self, t):
        t = np.asarray(t, dtype=float)
        tt = np.maximum(t, self.t_flat)
        with np.errstate(divide="ignore", invalid="ignore"):
            slow = math.log(self.coef) + self.gamma * np.log(tt) + self.slowly_varying.log(tt)
        flat = (t < self.t_flat) | (slow - self.b * tt > self._log_cap)
        return np.where(flat, self._log_cap + self.b * t, slow)


@dataclass(frozen=True)
class StepTail(TailFunction):
    """Tail of a piecewise-constant function: ``T(u) = sum_{l_j >= u} m_j``."""

    levels: tuple  # distinct positive levels, descending
    masses: tuple  # measure carried by each level

    @property
    def mass(self) -> float:
        return math.fsum(self.masses)

    @cached_property
    def _cum(self):
        return np.array(self.levels), np.cumsum(np.array(self.masses))

    def log_tail_at(self, t):
        return np.log(self._eval(np.exp(np.asarray(t, dtype=float))))

    def _eval(self, u):
        lv, cum = self._cum
        if len(lv) == 0:
            return np.zeros_like(u)
        # number of levels >= u (levels are descending)
        k = np.searchsorted(-lv, -u, side="right")
        return np.where(k > 0, cum[np.clip(k - 1, 0, None)], 0.0)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u <= 0):
            raise DomainError("tail functions are defined for u > 0")
        out = self._eval(u)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class InvertedTail(TailFunction):
    """Tail of a power-log function, by inverting its monotone profile.

    With ``y = -ln x`` the function ``ln|f|`` increases in ``y``, so
    ``{|f| >= u}`` is ``(0, e^-y*)`` with ``ln|f|(y*) = ln u``.
    """

    f: PowerLog
    mass: float = 1.0

    def __post_init__(self):
        sv = self.f.slowly_varying
        if sv.kind == "log_power" and sv.kappa < 0 and self.f.big_delta + sv.kappa <= 0:
            raise DomainError("|f| is not monotone for this slowly varying factor")
        if self.f.scale == 0:
            raise DomainError("use a StepTail for the zero function")

    @property
    def decay_exponent(self) -> float:
        return 1.0 / self.f.big_delta

    @cached_property
    def floor_log(self) -> float:
        """``ln|f|`` at ``x -> 1``; ``-inf`` when ``delta > 0``."""
        return -math.inf if self.f.delta else float(self.f.log_abs_at_depth(0.0))

    def depth(self, log_u):
        v = np.atleast_1d(np.asarray(log_u, dtype=float))
        out = np.zeros_like(v)
        need = v > self.floor_log
        if not np.any(need):
            return out.reshape(np.shape(log_u))
        target = v[need]
        lo = np.zeros_like(target)
        hi = np.ones_like(target)
        lf = self.f.log_abs_at_depth
        while True:
            short = lf(hi) < target
            if not np.any(short):
                break
            hi = np.where(short, 2.0 * hi, hi)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            up = lf(mid) < target
            lo = np.where(up, mid, lo)
            hi = np.where(up, hi, mid)
        out[need] = 0.5 * (lo + hi)
        return out.reshape(np.shape(log_u))

    def log_tail_at(self, t):
        return -self.depth(t)


def tail_of(f: FunctionRep) -> TailFunction:
    """Exact tail of an evaluable function."""
    if isinstance(f, TailDefined):
        raise EvaluationUnsupported("the function is already given by its tail")
    if isinstance(f, PowerLog):
        if f.scale == 0:
            return StepTail((), ())
        return InvertedTail(f)
    if isinstance(f, (Sampled, Indicator)):
        fs = to_sampled(f)
        v = np.abs(fs._values)
        w = fs.piece_measures
        keep = v > 0
        acc: dict = {}
        for lvl, m in zip(v[keep].tolist(), w[keep].tolist()):
            acc[lvl] = acc.get(lvl, 0.0) + m
        levels = tuple(sorted(acc, reverse=True))
        return StepTail(levels, tuple(acc[l] for l in levels))
    raise EvaluationUnsupported(f"no tail for {type(f).__name__}")


def _layer_cake_integral(T: TailFunction, p: float, rel_tol: float):
    """``p int_0^inf u^(p-1) T(u) du`` as ``(value, error)``."""
    if isinstance(T, StepTail):
        lv, _ = T._cum
        if len(lv) == 0:
            return 0.0, 0.0
        cum = np.cumsum(np.array(T.masses))
        if math.isinf(cum[-1]):
            return math.inf, 0.0
        nxt = np.append(lv[1:], 0.0)
        terms = cum * (lv ** p - nxt ** p)
        total = math.fsum(terms.tolist())
        return total, 4 * np.finfo(float).eps * len(terms) * total

    kappa = T.decay_exponent
    if kappa is None or p >= kappa:
        raise TailIntegralDivergent(f"p={p} is not below the tail exponent {kappa}")

    # u in (0, 1]: u = v^(1/p) absorbs the weight p u^(p-1)
    def lower(v):
        with np.errstate(divide="ignore"):
            return np.exp(T.log_tail_at(np.log(v) / p))

    kinks = []
    if isinstance(T, InvertedTail) and T.floor_log < 0:
        kinks.append(math.exp(p * T.floor_log))
    low, low_err = integrate(lower, 0.0, 1.0, rel_tol=rel_tol, breakpoints=kinks)

    # u = e^t, t = s / (kappa - p): the integrand decays like e^-s
    rate = kappa - p

    def upper(s):
        # p t + ln T(e^t) = -s + excess(t)
        return np.exp(-s + T.log_excess_at(s / rate))

    s_kinks = [1.0]
    if isinstance(T, AnalyticTail):
        s_kinks.append(rate * T.t_flat)
    elif getattr(T, "floor_log", 0.0) > 0:
        s_kinks.append(rate * T.floor_log)
    up, up_err, diverged = integrate_to_infinity(upper, 0.0, rel_tol=rel_tol, breakpoints=s_kinks)
    if diverged:
        raise TailIntegralDivergent(f"layer-cake integral diverges at p={p}")
    scale = p / rate
    return low + scale * up, low_err + scale * up_err


def log_norm_from_tail(T: TailFunction, p: float, tol: float = DEFAULT_REL_TOL) -> float:
    if not 0.0 < p <= 1.0:
        raise DomainError(f"p must lie in (0, 1], got {p!r}")
    try:
        val, _ = _layer_cake_integral(T, p, max(0.1 * tol * p, _QUAD_FLOOR))
    except TailIntegralDivergent:
        return math.inf
    if val == 0.0:
        return -math.inf
    return math.log(val) / p


def norm_from_tail(T: TailFunction, p: float, tol: float = DEFAULT_REL_TOL) -> NormResult:
    """``[p int_0^inf u^(p-1) T(u) du]^(1/p)``, which equals ``||f||_p`` for ``T = T_f``."""
    if not 0.0 < p <= 1.0:
        raise DomainError(f"p must lie in (0, 1], got {p!r}")
    val, err = _layer_cake_integral(T, p, max(0.1 * tol * p, _QUAD_FLOOR))
    if val == math.inf:
        return NormResult(math.inf, p, 0.0, True)
    if val == 0.0:
        return NormResult(0.0, p, 0.0, True)
    value = math.exp(math.log(val) / p)
    rel = err / val / p
    return NormResult(value, p, value * rel, rel <= tol)


@dataclass(frozen=True)
class TailBoundReport:
    u_grid: tuple
    exact_or_empirical_tail: tuple
    tcheby_bound: tuple
    optimal_p_bound: tuple
    gap_ratio: tuple
    norm_bound: tuple = ()  # inf_p ||f||_p^p / u^p, when available
    p_used: tuple = ()
    # log-space copies, filled when the linear values may over/underflow
    log_u: tuple = ()
    log_tail: tuple = ()
    log_optimal_p: tuple = ()
    log_tcheby: tuple = ()

    @property
    def bounds_hold(self) -> bool:
        if self.log_tail:
            tol = math.log1p(1e-9)
            return all(not b < t - tol for col in (self.log_optimal_p, self.log_tcheby)
                       for b, t in zip(col, self.log_tail) if not math.isnan(b))
        cols = [self.tcheby_bound, self.optimal_p_bound, self.norm_bound]
        return all(b >= t * (1 - 1e-9)
                   for col in cols for b, t in zip(col, self.exact_or_empirical_tail)
                   if not math.isnan(b))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["u", "tail", "tcheby", "optimal_p", "gap_ratio"])
        for row in zip(self.u_grid, self.exact_or_empirical_tail, self.tcheby_bound,
                       self.optimal_p_bound, self.gap_ratio):
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


def _inf_power_bound(log_level, a, b, log_u):
    """``inf_p exp(p (log_level(p) - ln u))`` over ``(a, b)``."""
    r = inf_open_interval(lambda p: p * (log_level(p) - log_u), a, b)
    return math.exp(r.log_value) if r.log_value < 709 else math.inf


def tcheby_tail_bound(f: FunctionRep, psi: PsiFunction, u_grid: Sequence[float],
                      gls_value: Optional[float] = None, tol: float = DEFAULT_REL_TOL) -> TailBoundReport:
    """Tchebychev tail bounds from the ``G psi`` norm and from the norm profile."""
    G = gls_norm(f, psi, tol).value if gls_value is None else gls_value
    if not 0 < G < math.inf:
        raise DomainError("f needs a finite nonzero G psi norm")
    lnG = math.log(G)
    ln = log_norm_function(f, tol)
    T = f.tail if isinstance(f, TailDefined) else tail_of(f)
    nan = float("nan")
    tails, tch, nb, gaps = [], [], [], []
    for u in u_grid:
        if not u > 0:
            raise DomainError("u values must be positive")
        lu = math.log(u)
        t = T(u)
        bound = _inf_power_bound(lambda p: lnG + float(psi.log_psi(p)), psi.a, psi.b, lu)
        inner = _inf_power_bound(ln, psi.a, psi.b, lu)
        tails.append(t)
        tch.append(bound)
        nb.append(inner)
        gaps.append(bound / t if t > 0 else math.inf)
    u_t = tuple(float(u) for u in u_grid)
    return TailBoundReport(u_t, tuple(tails), tuple(tch), tuple(nan for _ in u_t), tuple(gaps), tuple(nb))


def optimal_p_tail_estimate(b: float, gamma: float = 0.0, slowly_varying: SlowlyVarying | None = None,
                            c: float = 1.0, x_grid: Sequence[float] = (), coef: float = 1.0,
                            with_inf: bool = False, tol: float = DEFAULT_REL_TOL,
                            log_x_grid: Sequence[float] = ()) -> TailBoundReport:
    """Tchebychev bound at ``p = b - c / ln x`` for the analytic tail model.

    ``gap_ratio`` is bound / exact tail, which grows like ``ln x``.  Points may
    be given as ``ln x`` through ``log_x_grid`` when ``x`` overflows a double;
    all comparisons are made in log space.  With ``with_inf`` the report also
    carries the bound optimised over all ``p``.
    """
    if not c > 0:
        raise DomainError("c must be positive")
    if x_grid and log_x_grid:
        raise DomainError("give either x_grid or log_x_grid")
    for x in x_grid:
        if not x >= math.e:
            raise DomainError(f"x must be >= e, got {x!r}")
    logs = [math.log(x) for x in x_grid] if x_grid else [float(v) for v in log_x_grid]
    T = AnalyticTail(coef, b, gamma, slowly_varying or SlowlyVarying())
    psi = tail_model_psi(b, gamma, T.slowly_varying)
    lt, lo, lc, ps = [], [], [], []
    for lx in logs:
        if not lx >= 1.0:
            raise DomainError(f"x must be >= e, got ln x = {lx!r}")
        p = b - c / lx
        if not p > 0:
            raise DomainError(f"p = b - c/ln x = {p} is not positive at ln x = {lx}; lower c")
        I, _ = _layer_cake_integral(T, p, max(0.1 * tol * p, _QUAD_FLOOR))
        lt.append(float(T.log_tail_at(lx)))
        lo.append(math.log(I) - p * lx)
        ps.append(p)
        if with_inf:
            r = inf_open_interval(lambda q: q * (log_norm_from_tail(T, q, tol) - lx), psi.a, psi.b)
            lc.append(r.log_value)
        else:
            lc.append(math.nan)
    exp = np.exp
    with np.errstate(over="ignore"):
        return TailBoundReport(
            tuple(exp(logs).tolist()), tuple(exp(lt).tolist()), tuple(exp(lc).tolist()),
            tuple(exp(lo).tolist()), tuple(exp(np.subtract(lo, lt)).tolist()), (), tuple(ps),
            log_u=tuple(logs), log_tail=tuple(lt), log_optimal_p=tuple(lo), log_tcheby=tuple(lc))


def gap_law_slope(report: TailBoundReport) -> float:
    """Slope of ``ln(gap_ratio)`` against ``ln(ln x)``."""
    lx = np.array(report.log_u) if report.log_u else np.log(np.array(report.u_grid))
    x = np.log(lx)
    y = np.log(np.array(report.gap_ratio))
    return float(np.polyfit(x, y, 1)[0])
