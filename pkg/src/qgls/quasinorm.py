"""L_p quasi-norms for 0 < p <= 1 and the quasi-norm algebra around them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DivergentLogIntegral, DomainError, EvaluationUnsupported
from .measure import (FunctionRep, Indicator, PowerLog, Sampled, TailDefined,
                      UNIT_INTERVAL, add)
from .quadrature import integrate_to_infinity

DEFAULT_REL_TOL = 1e-9
# K15-G7 estimates cannot certify much below this relative level
_QUAD_FLOOR = 2e-14
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class NormResult:
    value: float
    p: float
    abs_error_estimate: float
    converged: bool

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


@dataclass(frozen=True)
class PowerIntegral:
    """``int |f|^p dmu`` together with its absolute error estimate."""

    value: float
    error: float
    exact: bool = False

    @property
    def diverged(self) -> bool:
        return self.value == math.inf


def _check_p(p: float):
    if not (0.0 < p <= 1.0):
        raise DomainError(f"p must lie in (0, 1], got {p!r}")


def power_integral(f: FunctionRep, p: float, rel_tol: float = DEFAULT_REL_TOL) -> PowerIntegral:
    """``int |f|^p dmu`` for ``p > 0``; ``value == inf`` on divergence."""
    if isinstance(f, PowerLog):
        return _powerlog_integral(f, p, rel_tol)
    if isinstance(f, Sampled):
        v = np.abs(f._values)
        w = f.piece_measures
        nz = v > 0
        if np.any(np.isinf(w[nz])):
            return PowerIntegral(math.inf, 0.0, True)
        terms = w[nz] * v[nz] ** p
        total = math.fsum(terms.tolist())
        return PowerIntegral(total, 4 * _EPS * len(terms) * total, True)
    if isinstance(f, Indicator):
        if f.height == 0:
            return PowerIntegral(0.0, 0.0, True)
        total = abs(f.height) ** p * f.measure
        return PowerIntegral(total, 4 * _EPS * total, True)
    if isinstance(f, TailDefined):
        raise EvaluationUnsupported("tail-defined functions: use qgls.tails.norm_from_tail")
    raise EvaluationUnsupported(f"no L_p integral for {type(f).__name__}")


def _powerlog_integral(f: PowerLog, p: float, rel_tol: float) -> PowerIntegral:
    # x = exp(-y) turns the integral into int_0^inf e^{-r y} y^{p delta} L(y)^p dy
    # with r = 1 - p Delta; rescaling s = r y gives every integrand unit decay.
    if f.scale == 0:
        return PowerIntegral(0.0, 0.0, True)
    r = 1.0 - p * f.big_delta
    if r <= 0.0:
        return PowerIntegral(math.inf, 0.0)
    pd = p * f.delta
    L = f.slowly_varying

    def integrand(s):
        with np.errstate(divide="ignore"):
            log_s = np.log(s)
        return np.exp(-s + pd * log_s + p * L.log(s / r)) if pd else np.exp(-s + p * L.log(s / r))

    # s^(p delta) has an unbounded derivative at 0; graded breakpoints keep bisection cheap
    bps = (1e-12, 1e-9, 1e-6, 1e-3, 1.0) if pd else (1.0,)
    val, err, diverged = integrate_to_infinity(integrand, 0.0, rel_tol=rel_tol, breakpoints=bps)
    if diverged:
        return PowerIntegral(math.inf, 0.0)
    log_pref = p * math.log(abs(f.scale)) - (1.0 + pd) * math.log(r)
    pref = math.exp(log_pref)
    return PowerIntegral(pref * val, pref * err)


def lp_quasinorm(f: FunctionRep, p: float, tol: float = DEFAULT_REL_TOL) -> NormResult:
    """``(int |f|^p dmu)^(1/p)`` to relative accuracy ``tol``."""
    _check_p(p)
    pi = power_integral(f, p, rel_tol=max(0.1 * tol * p, _QUAD_FLOOR))
    if pi.diverged:
        return NormResult(math.inf, p, 0.0, True)
    if pi.value == 0.0:
        return NormResult(0.0, p, 0.0, True)
    log_value = math.log(pi.value) / p
    if log_value > 709.0:
        return NormResult(math.inf, p, 0.0, False)
    value = math.exp(log_value)
    rel = pi.error / pi.value / p
    return NormResult(value, p, value * rel, pi.exact or rel <= tol)


def log_lp_quasinorm(f: FunctionRep, p: float, tol: float = DEFAULT_REL_TOL) -> float:
    """``ln ||f||_p`` without overflow; ``-inf`` for the zero function."""
    _check_p(p)
    pi = power_integral(f, p, rel_tol=max(0.1 * tol * p, _QUAD_FLOOR))
    if pi.diverged:
        return math.inf
    if pi.value == 0.0:
        return -math.inf
    return math.log(pi.value) / p


def geometric_mean_limit(f: FunctionRep, tol: float = 1e-12) -> float:
    """``exp(int_0^1 ln|f(x)| dx)``, the limit of ``||f||_p`` as ``p -> 0+``."""
    if f.space.kind != UNIT_INTERVAL:
        raise DomainError("the geometric-mean limit is defined on the unit interval")
    if isinstance(f, PowerLog):
        if f.scale == 0:
            raise DivergentLogIntegral("ln|f| is -inf on a set of positive measure")

        def integrand(y):
            return np.exp(-y) * f.log_abs_at_depth(y)

        val, _, diverged = integrate_to_infinity(integrand, 0.0, rel_tol=tol, breakpoints=(1.0,))
        if diverged:
            raise DivergentLogIntegral("int ln|f| diverges")
        return math.exp(val)
    if isinstance(f, Sampled):
        v = np.abs(f._values)
        if f.grid[0] > 0.0 or np.any(v == 0.0):
            raise DivergentLogIntegral("f vanishes on a set of positive measure")
        return math.exp(math.fsum((f.piece_measures * np.log(v)).tolist()))
    if isinstance(f, Indicator):
        if f.height == 0 or not math.isclose(f.measure, 1.0, rel_tol=1e-15):
            raise DivergentLogIntegral("f vanishes on a set of positive measure")
        return abs(f.height)
    raise EvaluationUnsupported(f"no geometric mean for {type(f).__name__}")


@dataclass(frozen=True)
class QuasiTriangleCertificate:
    p_or_a: float
    constant_claimed: float
    worst_ratio_observed: float
    witness: tuple
    p_norm_holds: Optional[bool] = None

    @property
    def holds(self) -> bool:
        return self.worst_ratio_observed <= self.constant_claimed * (1 + 1e-9)


def quasi_triangle_constant(p: float) -> float:
    """``2^(1/p - 1)``, the quasi-triangle constant of L_p."""
    _check_p(p)
    return 2.0 ** (1.0 / p - 1.0)


def quasi_triangle_check(f: FunctionRep, g: FunctionRep, p: float,
                         tol: float = DEFAULT_REL_TOL) -> QuasiTriangleCertificate:
    """Ratio ``||f+g||_p / (||f||_p + ||g||_p)`` against ``2^(1/p-1)``.

    Also records whether the p-norm form ``||f+g||^p <= ||f||^p + ||g||^p``
    holds.  ``f + g`` must be exactly representable (piecewise constant).
    """
    nf, ng = lp_quasinorm(f, p, tol), lp_quasinorm(g, p, tol)
    if not (nf.finite and ng.finite):
        raise DomainError("both norms must be finite")
    nfg = lp_quasinorm(add(f, g), p, tol)
    denom = nf.value + ng.value
    ratio = 0.0 if denom == 0 else nfg.value / denom
    p_norm = nfg.value ** p <= (nf.value ** p + ng.value ** p) * (1 + 1e-12)
    return QuasiTriangleCertificate(p, quasi_triangle_constant(p), ratio, (f, g), p_norm)


def aoki_rolewicz_power(C: float) -> float:
    """Power parameter ``p`` with ``C = 2^(1/p - 1)``."""
    if not C >= 1.0:
        raise DomainError(f"a quasi-triangle constant is >= 1, got {C!r}")
    return 1.0 / (1.0 + math.log2(C))


def double_inequality(A, B, p):
    """The triple ``((A+B)^p, A^p + B^p, 2^(1-p) (A+B)^p)``, nondecreasing for ``A, B >= 0``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    s = (A + B) ** p
    return s, A ** p + B ** p, 2.0 ** (1.0 - p) * s
