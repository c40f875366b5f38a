"""Picard iteration in quasi-metric spaces with a-priori error certificates.

Two certificates are available.  With the relaxed triangle inequality
``d(x, y) <= K [d(x, z) + d(z, y)]`` and ``alpha K^2 < 1``::

    d(x*, x_n) <= K alpha^n d0 / (1 - alpha K^2)

and with the three-step chain ``d(x, y) <= K [d(x, z) + d(z, w) + d(w, y)]``
and ``alpha K < 1``::

    d(x*, x_n) <= K alpha^n d0 / (1 - alpha K)

where ``d0 = d(x_0, x_1)``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from .errors import ConditionViolated, DegenerateSample, DomainError, DomainMismatch, NonFiniteIterate
from .gls import gls_norm
from .measure import Sampled, add, scaled
from .psi import PsiFunction

TRIANGLE_SQUARED = "triangle_squared"
QUADRILATERAL = "quadrilateral"
MODES = (TRIANGLE_SQUARED, QUADRILATERAL)


@dataclass(frozen=True)
class QuasiMetricSpace:
    distance: Callable[[Any, Any], float]
    K_triangle: float
    K_quad: Optional[float] = None
    point_kind: str = "vector"  # "vector" or "sampled"

    def __post_init__(self):
        if not self.K_triangle >= 1.0:
            raise DomainError("K_triangle must be >= 1")
        if self.K_quad is not None and not 1.0 <= self.K_quad <= self.K_triangle ** 2 * (1 + 1e-15):
            raise DomainError("K_quad must lie in [1, K_triangle^2]")

    def constant(self, mode: str) -> float:
        if mode == TRIANGLE_SQUARED:
            return self.K_triangle
        if mode == QUADRILATERAL:
            if self.K_quad is None:
                raise DomainError("the space declares no quadrilateral constant")
            return self.K_quad
        raise DomainError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class SpotCheck:
    """Worst observed ratio ``d(x, y) / (sum of chain distances)`` per inequality."""

    triangle_ratio: float
    quad_ratio: Optional[float]
    K_triangle: float
    K_quad: Optional[float]

    @property
    def holds(self) -> bool:
        ok = self.triangle_ratio <= self.K_triangle * (1 + 1e-9)
        if self.K_quad is not None and self.quad_ratio is not None:
            ok = ok and self.quad_ratio <= self.K_quad * (1 + 1e-9)
        return ok


def spot_check_space(space: QuasiMetricSpace, points: Sequence[Any], n_samples: int = 200,
                     seed: int = 0) -> SpotCheck:
    """Test the declared inequalities on random triples and quadruples drawn from ``points``."""
    if len(points) < 3:
        raise DegenerateSample("need at least 3 points")
    rng = np.random.default_rng(seed)
    d = space.distance
    tri = quad = 0.0
    for _ in range(n_samples):
        i, j, k, m = rng.integers(0, len(points), size=4)
        x, y, z, w = points[i], points[j], points[k], points[m]
        dxy = d(x, y)
        if dxy == 0:
            continue
        den = d(x, z) + d(z, y)
        tri = max(tri, math.inf if den == 0 else dxy / den)
        if space.K_quad is not None:
            den = d(x, z) + d(z, w) + d(w, y)
            quad = max(quad, math.inf if den == 0 else dxy / den)
    return SpotCheck(tri, quad if space.K_quad is not None else None, space.K_triangle, space.K_quad)


@dataclass(frozen=True)
class ContractionProblem:
    space: QuasiMetricSpace
    map: Callable[[Any], Any]
    alpha: float
    x0: Any

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)")


def contraction_spot_check(problem: ContractionProblem, pairs: Sequence[tuple]) -> float:
    """Worst ``d(Tx, Ty) / (alpha d(x, y))`` over the pairs; <= 1 + 1e-9 is consistent."""
    d, T = problem.space.distance, problem.map
    worst = 0.0
    for x, y in pairs:
        dxy = d(x, y)
        if dxy > 0:
            worst = max(worst, d(T(x), T(y)) / (problem.alpha * dxy))
    return worst


def estimate_alpha(space: QuasiMetricSpace, fmap: Callable, sample_pairs: Sequence[tuple]) -> float:
    """Largest observed ``d(Tx, Ty) / d(x, y)``; a lower estimate of the Lipschitz constant."""
    if len(sample_pairs) < 10:
        raise DomainError("need at least 10 sample pairs")
    ratios = []
    for x, y in sample_pairs:
        dxy = space.distance(x, y)
        if dxy > 0:
            ratios.append(space.distance(fmap(x), fmap(y)) / dxy)
    if not ratios:
        raise DegenerateSample("all sample pairs coincide")
    return max(ratios)


def certificate_bound(mode: str, K: float, alpha: float, d0: float, n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    denom = 1.0 - alpha * K * K if mode == TRIANGLE_SQUARED else 1.0 - alpha * K
    return K * alpha ** n * d0 / denom


def point_digest(x) -> str:
    """SHA-256 of the point's values rendered at 17 significant digits."""
    vals = np.atleast_1d(np.asarray(x.values if isinstance(x, Sampled) else x, dtype=float))
    text = ",".join(format(float(v), ".17g") for v in vals.ravel())
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass(frozen=True)
class ContractionCertificate:
    mode: str
    K: float
    alpha: float
    d0: float
    bounds: tuple       # B_n, n = 0..n_iters
    step_dists: tuple   # d(x_n, x_{n+1}), n = 0..n_iters
    final_point: Any
    n_iters: int
    reference_dists: tuple = field(default=())  # d(x*, x_n) when a reference is supplied

    @property
    def sound(self) -> bool:
        return all(r <= b * (1 + 1e-12) + 1e-300 for r, b in zip(self.reference_dists, self.bounds))

    def decay_slope(self) -> float:
        """Least-squares slope of ``ln d(x_n, x_{n+1})`` against ``n`` (positive steps only)."""
        s = np.array(self.step_dists)
        n = np.arange(len(s))
        keep = s > 0
        if keep.sum() < 2:
            return -math.inf
        return float(np.polyfit(n[keep], np.log(s[keep]), 1)[0])

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "K": self.K,
            "alpha": self.alpha,
            "d0": self.d0,
            "iterations": [{"n": i, "step_dist": s, "bound": b}
                           for i, (s, b) in enumerate(zip(self.step_dists, self.bounds))],
            "final_point_digest": point_digest(self.final_point),
        }

    def to_json(self) -> str:
        from .serialize import dumps
        return dumps(self.to_dict())


def _finite(x) -> bool:
    v = x.values if isinstance(x, Sampled) else x
    return bool(np.all(np.isfinite(np.asarray(v, dtype=float))))


def _apply(T, x, n):
    try:
        y = T(x)
    except (OverflowError, FloatingPointError, DomainError) as exc:
        raise NonFiniteIterate(f"map failed at n={n}: {exc}") from exc
    if not _finite(y):
        raise NonFiniteIterate(f"map returned a non-finite value at n={n}")
    return y


def solve(problem: ContractionProblem, mode: str = TRIANGLE_SQUARED, target: Optional[float] = None,
          max_iter: int = 50, reference=None) -> ContractionCertificate:
    """Iterate ``x_{n+1} = T(x_n)`` until ``B_n <= target`` or ``n = max_iter``.

    ``reference`` is an optional known fixed point; its distances to the
    iterates are recorded so the certificate can be audited.
    """
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}")
    K = problem.space.constant(mode)
    a = problem.alpha
    if mode == TRIANGLE_SQUARED and a * K * K >= 1.0:
        raise ConditionViolated(f"alpha*K^2 = {a * K * K} >= 1")
    if mode == QUADRILATERAL and a * K >= 1.0:
        raise ConditionViolated(f"alpha*K_quad = {a * K} >= 1")
    if max_iter < 0:
        raise DomainError("max_iter must be >= 0")

    d, T = problem.space.distance, problem.map
    x = problem.x0
    nxt = _apply(T, x, 0)
    d0 = d(x, nxt)
    bounds, steps, refs = [], [], []
    n = 0
    while True:
        b = float(certificate_bound(mode, K, a, d0, n))
        bounds.append(b)
        steps.append(d(x, nxt))
        if reference is not None:
            refs.append(d(reference, x))
        if d0 == 0.0 or n >= max_iter or (target is not None and b <= target):
            break
        n += 1
        x, nxt = nxt, _apply(T, nxt, n)
    return ContractionCertificate(mode, K, a, d0, tuple(bounds), tuple(steps), x, n, tuple(refs))


# --- ready-made spaces --------------------------------------------------------

def squared_distance_space() -> QuasiMetricSpace:
    """Real vectors with ``d(x, y) = |x - y|^2``: K = 2 and three-step constant 3."""
    def dist(x, y):
        diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        return float(np.sum(diff * diff))

    return QuasiMetricSpace(dist, 2.0, 3.0, "vector")


def _same_pieces(u: Sampled, v: Sampled):
    if u.grid != v.grid or u.space != v.space:
        raise DomainMismatch("sampled points must share grid and measure space")


def sampled_lp_space(p: float) -> QuasiMetricSpace:
    """Sampled functions on a common grid with the exact distance ``||u - v||_p``."""
    if not 0.0 < p <= 1.0:
        raise DomainError("p must lie in (0, 1]")

    def dist(u: Sampled, v: Sampled) -> float:
        _same_pieces(u, v)
        diff = np.abs(u._values - v._values)
        s = math.fsum((u.piece_measures * diff ** p).tolist())
        return s ** (1.0 / p)

    return QuasiMetricSpace(dist, 2.0 ** (1.0 / p - 1.0), 3.0 ** (1.0 / p - 1.0), "sampled")


def gls_space(psi: PsiFunction, tol: float = 1e-9) -> QuasiMetricSpace:
    """Sampled functions with ``d(u, v) = ||u - v||_{G psi}``."""
    def dist(u, v) -> float:
        return gls_norm(add(u, scaled(v, -1.0)), psi, tol).value

    a = psi.a
    return QuasiMetricSpace(dist, 2.0 ** (1.0 / a - 1.0), 3.0 ** (1.0 / a - 1.0), "sampled")


# --- ready-made problems ------------------------------------------------------

def scalar_scaling_problem(factor: float = 1.0 / 3.0, x0: float = 1.0) -> ContractionProblem:
    """``x -> factor * x`` under ``|x - y|^2``; fixed point 0, alpha = factor^2."""
    if not 0.0 <= abs(factor) < 1.0:
        raise DomainError("|factor| must be < 1")
    return ContractionProblem(squared_distance_space(), lambda x: factor * np.asarray(x, dtype=float),
                              factor * factor, np.asarray(float(x0)))


def sampled_sine_problem(n_pieces: int = 64, p: float = 0.8, alpha: float = 0.6,
                         seed: int = 0) -> tuple:
    """``u -> h + alpha sin(R(u - h))`` on a uniform grid, R reversing piece order.

    Uniform pieces make R measure preserving and ``|sin s - sin t| <= |s - t|``,
    so the map is an ``alpha``-contraction in every ``L_p``; its fixed point is
    ``h``.  Returns ``(problem, h)``.
    """
    rng = np.random.default_rng(seed)
    grid = tuple((np.arange(n_pieces) / n_pieces).tolist())
    h = Sampled(grid, tuple(rng.uniform(-1.0, 1.0, n_pieces).tolist()))
    hv = h._values

    def T(u: Sampled) -> Sampled:
        return Sampled(grid, tuple((hv + alpha * np.sin((u._values - hv)[::-1])).tolist()))

    x0 = Sampled(grid, tuple(rng.uniform(-3.0, 3.0, n_pieces).tolist()))
    return ContractionProblem(sampled_lp_space(p), T, alpha, x0), h
