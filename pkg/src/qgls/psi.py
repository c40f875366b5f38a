"""Generators psi on an open interval (a, b) with 0 < a < b <= 1.

Every kind implements ``log_psi`` (vectorised, no domain check); the public
entry point :func:`psi_eval` validates ``p``.  ``inf_psi`` and ``sup_psi`` are
computed once per instance and cached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError, PsiDomainError
from .measure import SlowlyVarying
from .optimize import DEFAULT_EPS_REL, inf_open_interval, sup_open_interval


class PsiFunction:
    a: float
    b: float

    def _check_interval(self):
        if not (0.0 < self.a < self.b <= 1.0):
            raise DomainError(f"need 0 < a < b <= 1, got a={self.a!r}, b={self.b!r}")

    def log_psi(self, p):
        raise NotImplementedError

    def __call__(self, p):
        return psi_eval(self, p)

    @property
    def unbounded_above(self) -> bool:
        """True when psi(p) -> inf at an endpoint, so that sup psi = inf."""
        return False

    @cached_property
    def inf_psi(self) -> float:
        r = inf_open_interval(lambda p: float(self.log_psi(p)), self.a, self.b, n_grid=257, xtol_rel=1e-12)
        return math.exp(r.log_value)

    @cached_property
    def sup_psi(self) -> float:
        if self.unbounded_above:
            return math.inf
        r = sup_open_interval(lambda p: float(self.log_psi(p)), self.a, self.b, n_grid=257, xtol_rel=1e-12)
        return r.value


def psi_eval(psi: PsiFunction, p):
    """psi(p) for p strictly inside (a, b); accepts scalars or arrays."""
    pa = np.asarray(p, dtype=float)
    if not np.all((pa > psi.a) & (pa < psi.b)):
        raise PsiDomainError(f"p={p!r} outside the open interval ({psi.a}, {psi.b})")
    out = np.exp(psi.log_psi(pa))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ConstantPsi(PsiFunction):
    a: float
    b: float
    c: float = 1.0

    def __post_init__(self):
        self._check_interval()
        if not (self.c > 0 and math.isfinite(self.c)):
            raise DomainError("constant psi must be positive and finite")

    def log_psi(self, p):
        return np.full_like(np.asarray(p, dtype=float), math.log(self.c))

    @cached_property
    def inf_psi(self) -> float:
        return self.c

    @cached_property
    def sup_psi(self) -> float:
        return self.c


@dataclass(frozen=True)
class IwaniecSbordonePsi(PsiFunction):
    """``psi(p) = (b - p)^(-theta / p)``."""

    a: float
    b: float
    theta: float = 1.0

    def __post_init__(self):
        self._check_interval()
        if not self.theta >= 0:
            raise DomainError("theta must be nonnegative")

    def log_psi(self, p):
        p = np.asarray(p, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return -(self.theta / p) * np.log(self.b - p)

    @property
    def unbounded_above(self) -> bool:
        return self.theta > 0


@dataclass(frozen=True)
class BandaliyevPsi(PsiFunction):
    """``psi(p) = (b - p)^(-1 / p)`` on ``(b/2, b)``."""

    b: float
    a: float = field(default=None)

    def __post_init__(self):
        if self.a is None:
            object.__setattr__(self, "a", self.b / 2.0)
        if not math.isclose(self.a, self.b / 2.0, rel_tol=1e-15, abs_tol=0.0):
            raise DomainError("the Bandaliyev generator lives on (b/2, b)")
        self._check_interval()

    def log_psi(self, p):
        p = np.asarray(p, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return -np.log(self.b - p) / p

    @property
    def unbounded_above(self) -> bool:
        return True


@dataclass(frozen=True)
class TailModelPsi(PsiFunction):
    """``psi(p) = (b - p)^(-(gamma + 1) / b) * L(1 / (b - p))^(1 / b)``."""

    a: float
    b: float
    gamma: float = 0.0
    slowly_varying: SlowlyVarying = field(default_factory=SlowlyVarying)

    def __post_init__(self):
        self._check_interval()
        if not self.b < 1.0:
            raise DomainError("tail-model psi needs b < 1")
        if not self.gamma >= 0:
            raise DomainError("gamma must be nonnegative")

    def log_psi(self, p):
        p = np.asarray(p, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            gap = self.b - p
            return (-(self.gamma + 1.0) * np.log(gap) + self.slowly_varying.log(1.0 / gap)) / self.b

    @property
    def unbounded_above(self) -> bool:
        return True


@dataclass(frozen=True)
class TabulatedPsi(PsiFunction):
    """Tabulated generator, typically the natural function of some f.

    Interpolation is linear in ``g(p) = p * ln psi(p)`` (the log-moment
    ``ln int |f|^p``).  That quantity is convex in ``p`` for natural
    functions, so interpolating it linearly never undercuts ``||f||_p``.
    Outside the node range the end segments are extended.
    """

    a: float
    b: float
    nodes: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        self._check_interval()
        nodes = tuple(float(x) for x in self.nodes)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        if len(nodes) < 2 or len(nodes) != len(values):
            raise DomainError("tabulated psi needs >= 2 nodes and matching values")
        if any(q <= p for p, q in zip(nodes, nodes[1:])):
            raise DomainError("nodes must be strictly increasing")
        if not (self.a <= nodes[0] and nodes[-1] <= self.b):
            raise DomainError("nodes must lie in [a, b]")
        if not all(v > 0 and math.isfinite(v) for v in values):
            raise DomainError("tabulated psi values must be positive and finite")

    @cached_property
    def _g(self):
        x = np.array(self.nodes)
        return x, x * np.log(np.array(self.values))

    def log_psi(self, p):
        p = np.asarray(p, dtype=float)
        x, g = self._g
        j = np.clip(np.searchsorted(x, p, side="right") - 1, 0, len(x) - 2)
        t = (p - x[j]) / (x[j + 1] - x[j])
        gp = g[j] + t * (g[j + 1] - g[j])
        return gp / p

    def _extremes(self):
        # g/p is monotone on every cell, so extremes sit at nodes or at a, b
        pts = np.concatenate([[self.a], np.array(self.nodes), [self.b]])
        return self.log_psi(pts)

    @cached_property
    def inf_psi(self) -> float:
        return float(np.exp(self._extremes().min()))

    @cached_property
    def sup_psi(self) -> float:
        return float(np.exp(self._extremes().max()))


@dataclass(frozen=True)
class ProductPsi(PsiFunction):
    """``Psi(p) = Theta(p) * psi(p)`` for an operator bound profile Theta."""

    base: PsiFunction
    theta: object  # qgls.transfer.OperatorBoundProfile

    @property
    def a(self) -> float:
        return self.base.a

    @property
    def b(self) -> float:
        return self.base.b

    def log_psi(self, p):
        return self.theta.log_theta(p) + self.base.log_psi(p)

    @property
    def unbounded_above(self) -> bool:
        return self.base.unbounded_above


def tail_model_psi(b: float, gamma: float = 0.0, slowly_varying: SlowlyVarying | None = None,
                   a: float | None = None) -> TailModelPsi:
    """Generator matching a tail ``x^-b (ln x)^gamma L(ln x)``.

    The model lives on ``(0, b)``; the left end is cut at ``a`` (default
    ``b / 20``) because the space needs ``a > 0``.
    """
    if not 0.0 < b < 1.0:
        raise DomainError("tail exponent b must lie in (0, 1)")
    if not gamma >= 0:
        raise DomainError("gamma must be nonnegative")
    return TailModelPsi(b / 20.0 if a is None else a, b, gamma, slowly_varying or SlowlyVarying())


def endpoint_eps(psi: PsiFunction, eps_rel: float = DEFAULT_EPS_REL) -> float:
    return eps_rel * (psi.b - psi.a)
