"""Carrying per-exponent operator bounds over to G psi norms.

If ``||U f||_p <= Theta(p) ||f||_p`` on ``(a, b)`` then
``||U f||_{G Psi} <= ||f||_{G psi}`` with ``Psi = Theta * psi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BoundViolated, DomainError, DomainMismatch
from .gls import gls_norm, log_norm_function
from .measure import FunctionRep, Sampled, dilate, multiply, sup_abs
from .parallel import parallel_map
from .psi import ProductPsi, PsiFunction
from .quasinorm import DEFAULT_REL_TOL

CONSTANT, POWER_OF_S, TABULATED = "constant", "power_of_s", "tabulated"


@dataclass(frozen=True)
class OperatorBoundProfile:
    """``Theta(p)`` on ``(a, b)``.

    ``constant``: Theta = c.  ``power_of_s``: Theta = s^(1/p).
    ``tabulated``: log-linear interpolation through ``(nodes, values)``.
    """

    kind: str
    a: float
    b: float
    c: float = 1.0
    s: float = 1.0
    nodes: tuple = ()
    values: tuple = ()
    operator_tag: Optional[str] = None
    empirical: bool = False

    def __post_init__(self):
        if not 0.0 < self.a < self.b <= 1.0:
            raise DomainError("need 0 < a < b <= 1")
        if self.kind == CONSTANT:
            if not (self.c > 0 and math.isfinite(self.c)):
                raise DomainError("constant Theta must be positive and finite")
        elif self.kind == POWER_OF_S:
            if not (self.s > 0 and math.isfinite(self.s)):
                raise DomainError("dilation factor must be positive")
        elif self.kind == TABULATED:
            nodes = tuple(float(x) for x in self.nodes)
            values = tuple(float(v) for v in self.values)
            object.__setattr__(self, "nodes", nodes)
            object.__setattr__(self, "values", values)
            if len(nodes) < 2 or len(nodes) != len(values):
                raise DomainError("tabulated Theta needs >= 2 nodes and matching values")
            if any(q <= p for p, q in zip(nodes, nodes[1:])):
                raise DomainError("nodes must be strictly increasing")
            if not all(v > 0 and math.isfinite(v) for v in values):
                raise DomainError("Theta values must be positive and finite")
        else:
            raise DomainError(f"unknown Theta kind {self.kind!r}")

    def log_theta(self, p):
        p = np.asarray(p, dtype=float)
        if self.kind == CONSTANT:
            return np.full_like(p, math.log(self.c))
        if self.kind == POWER_OF_S:
            return math.log(self.s) / p
        return np.interp(p, self.nodes, np.log(self.values))

    def __call__(self, p):
        out = np.exp(self.log_theta(p))
        return float(out) if np.ndim(out) == 0 else out

    @property
    def theta_kind(self) -> str:
        return "empirical" if self.empirical else self.kind


def constant_theta(a, b, c=1.0, tag=None):
    return OperatorBoundProfile(CONSTANT, a, b, c=c, operator_tag=tag)


def dilation_theta(a, b, s):
    return OperatorBoundProfile(POWER_OF_S, a, b, s=s, operator_tag=f"dilation:{s!r}")


# --- operators ----------------------------------------------------------------

@dataclass(frozen=True)
class Identity:
    tag: str = "identity"

    def __call__(self, f: FunctionRep) -> FunctionRep:
        return f


@dataclass(frozen=True)
class Dilation:
    """``f -> f(x / s)`` on the half line; ``||.||_p`` scales by ``s^(1/p)``."""

    s: float

    @property
    def tag(self) -> str:
        return f"dilation:{self.s!r}"

    def __call__(self, f):
        return dilate(f, self.s)


@dataclass(frozen=True)
class Multiplication:
    w: Sampled

    @property
    def tag(self) -> str:
        return "multiplication"

    @property
    def sup_weight(self) -> float:
        return sup_abs(self.w)

    def __call__(self, f):
        return multiply(self.w, f)


def transfer_psi(theta: OperatorBoundProfile, psi: PsiFunction) -> ProductPsi:
    """``Psi[Theta](p) = Theta(p) psi(p)``."""
    if not (math.isclose(theta.a, psi.a, rel_tol=1e-12) and math.isclose(theta.b, psi.b, rel_tol=1e-12)):
        raise DomainMismatch(f"Theta lives on ({theta.a}, {theta.b}) but psi on ({psi.a}, {psi.b})")
    return ProductPsi(psi, theta)


def measured_theta(operator, corpus: Sequence[FunctionRep], a: float, b: float, n_nodes: int = 33,
                   tol: float = DEFAULT_REL_TOL) -> OperatorBoundProfile:
    """Tabulated ``max_f ||U f||_p / ||f||_p`` on a node grid; flagged empirical.

    Each node value also covers a refined sample of its two neighbouring
    cells, so the interpolated profile dominates the measured ratio between
    nodes as well.
    """
    full = np.linspace(a, b, n_nodes + 2)
    nodes = full[1:-1]
    refine = 4
    fine = np.linspace(a, b, refine * (n_nodes + 1) + 1)
    lr = np.full(fine.size, -np.inf)
    for f in corpus:
        lf, lu = log_norm_function(f, tol), log_norm_function(operator(f), tol)
        with np.errstate(invalid="ignore"):
            r = np.array([lu(p) - lf(p) for p in fine])
        lr = np.maximum(lr, np.where(np.isfinite(r), r, -np.inf))
    # node k sits at fine index refine*(k+1); the outer nodes also cover the clamped ends
    lo = [0] + [refine * k for k in range(1, n_nodes)]
    hi = [refine * (k + 2) for k in range(n_nodes - 1)] + [fine.size - 1]
    vals = np.exp([lr[i:j + 1].max() for i, j in zip(lo, hi)])
    return OperatorBoundProfile(TABULATED, a, b, nodes=tuple(nodes.tolist()), values=tuple(vals.tolist()),
                                operator_tag=getattr(operator, "tag", None), empirical=True)


@dataclass(frozen=True)
class TransferReport:
    operator_tag: str
    theta_kind: str
    ratios: tuple  # gls_norm(U f, Psi) / gls_norm(f, psi) per corpus member

    @property
    def max_ratio(self) -> float:
        return max(self.ratios)

    def to_dict(self) -> dict:
        return {
            "operator_tag": self.operator_tag,
            "max_ratio": self.max_ratio,
            "per_function": [{"id": i, "ratio": r} for i, r in enumerate(self.ratios)],
            "theta_kind": self.theta_kind,
        }


def verify_transfer_norm(operator, theta: OperatorBoundProfile, psi: PsiFunction,
                         corpus: Sequence[FunctionRep], tol: float = 1e-6,
                         n_check: int = 17) -> TransferReport:
    """Check ``Theta`` on the corpus, then report the G psi -> G Psi ratios.

    Raises ``BoundViolated`` when ``||U f||_p > Theta(p) ||f||_p (1 + tol)`` at
    some checked ``p``.
    """
    if not corpus:
        raise DomainError("empty corpus")
    Psi = transfer_psi(theta, psi)
    p_check = np.linspace(psi.a, psi.b, n_check + 2)[1:-1]
    quad_tol = min(DEFAULT_REL_TOL, 0.01 * tol)

    def one(item):
        i, f = item
        Uf = operator(f)
        lf, lu = log_norm_function(f, quad_tol), log_norm_function(Uf, quad_tol)
        for p in p_check:
            excess = lu(p) - lf(p) - float(theta.log_theta(p))
            if excess > math.log1p(tol):
                raise BoundViolated(
                    f"corpus member {i} breaks the bound at p={p:.6g}: ratio {math.exp(excess):.9g}",
                    function_index=i, p=float(p), ratio=math.exp(excess))
        num = gls_norm(Uf, Psi, quad_tol, log_norm=lu).value
        den = gls_norm(f, psi, quad_tol, log_norm=lf).value
        if den == 0:
            return 0.0 if num == 0 else math.inf
        return num / den

    ratios = parallel_map(one, list(enumerate(corpus)))
    tag = getattr(operator, "tag", None) or theta.operator_tag or "custom"
    return TransferReport(tag, theta.theta_kind, tuple(ratios))
