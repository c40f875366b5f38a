"""Measure spaces and the function representations the norm engines consume.

Four representations are supported:

* :class:`PowerLog`  -- ``c * x^-Delta * |ln x|^delta * L(|ln x|)`` on (0, 1);
* :class:`Sampled`   -- piecewise-constant data, left-closed pieces;
* :class:`Indicator` -- a scaled indicator of a finite union of intervals;
* :class:`TailDefined` -- known only through its distribution tail.

Everything here is immutable; arrays handed out are fresh copies or read-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DomainError, EvaluationUnsupported

UNIT_INTERVAL = "unit_interval"
HALF_LINE = "half_line"
FINITE_DISCRETE = "finite_discrete"
_SPACE_KINDS = (UNIT_INTERVAL, HALF_LINE, FINITE_DISCRETE)


@dataclass(frozen=True)
class MeasureSpace:
    kind: str = UNIT_INTERVAL
    weights: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in _SPACE_KINDS:
            raise DomainError(f"unknown measure space kind {self.kind!r}")
        if self.kind == FINITE_DISCRETE:
            if not self.weights:
                raise DomainError("finite_discrete space needs at least one atom")
            if any(not (w > 0 and math.isfinite(w)) for w in self.weights):
                raise DomainError("atom weights must be strictly positive and finite")
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        elif self.weights:
            raise DomainError(f"{self.kind} space takes no weights")

    @property
    def total_mass(self) -> float:
        if self.kind == UNIT_INTERVAL:
            return 1.0
        if self.kind == HALF_LINE:
            return math.inf
        return math.fsum(self.weights)

    @property
    def is_continuous(self) -> bool:
        return self.kind != FINITE_DISCRETE

    @property
    def upper(self) -> float:
        """Right end of the domain (continuous spaces)."""
        return 1.0 if self.kind == UNIT_INTERVAL else math.inf

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == UNIT_INTERVAL:
            return (x > 0.0) & (x < 1.0)
        if self.kind == HALF_LINE:
            return (x > 0.0) & np.isfinite(x)
        idx = np.rint(x)
        return (idx == x) & (idx >= 0) & (idx < len(self.weights))


def unit_interval() -> MeasureSpace:
    return MeasureSpace(UNIT_INTERVAL)


def half_line() -> MeasureSpace:
    return MeasureSpace(HALF_LINE)


def finite_discrete(weights: Sequence[float]) -> MeasureSpace:
    return MeasureSpace(FINITE_DISCRETE, tuple(weights))


@dataclass(frozen=True)
class SlowlyVarying:
    """``L == 1`` (kind ``"one"``) or ``L(y) = (1 + ln(1 + y))^kappa`` (``"log_power"``)."""

    kind: str = "one"
    kappa: float = 0.0

    def __post_init__(self):
        if self.kind not in ("one", "log_power"):
            raise DomainError(f"unknown slowly varying kind {self.kind!r}")
        if self.kind == "one" and self.kappa != 0.0:
            raise DomainError("kappa is only meaningful for kind 'log_power'")
        if not math.isfinite(self.kappa):
            raise DomainError("kappa must be finite")

    def log(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == "one" or self.kappa == 0.0:
            return np.zeros_like(y)
        return self.kappa * np.log1p(np.log1p(y))

    def dlog(self, y):
        """Derivative of ``ln L`` with respect to ``y``."""
        y = np.asarray(y, dtype=float)
        if self.kind == "one" or self.kappa == 0.0:
            return np.zeros_like(y)
        return self.kappa / ((1.0 + np.log1p(y)) * (1.0 + y))

    def __call__(self, y):
        out = np.exp(self.log(y))
        return float(out) if out.ndim == 0 else out


class FunctionRep:
    """Common base of the function representations."""

    space: MeasureSpace

    @property
    def evaluable(self) -> bool:
        return True

    def __call__(self, x):
        return evaluate(self, x)


@dataclass(frozen=True)
class PowerLog(FunctionRep):
    big_delta: float
    delta: float = 0.0
    slowly_varying: SlowlyVarying = field(default_factory=SlowlyVarying)
    scale: float = 1.0

    def __post_init__(self):
        if not self.big_delta > 1.0:
            raise DomainError(f"Delta must exceed 1, got {self.big_delta!r}")
        if not self.delta >= 0.0:
            raise DomainError(f"delta must be nonnegative, got {self.delta!r}")
        if not math.isfinite(self.scale):
            raise DomainError("scale must be finite")

    @property
    def space(self) -> MeasureSpace:
        return unit_interval()

    def log_abs_at_depth(self, y):
        """``ln|f(e^-y)|`` for ``y > 0``."""
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            out = self.big_delta * y + self.slowly_varying.log(y) + np.log(abs(self.scale))
            if self.delta:
                out = out + self.delta * np.log(y)
        return out


@dataclass(frozen=True)
class Sampled(FunctionRep):
    """Piecewise-constant function: ``values[i]`` on ``[grid[i], grid[i+1])``.

    The last piece runs to the right end of the domain; the function is zero
    left of ``grid[0]``.  On a finite discrete space ``grid`` lists atom
    indices and ``values`` the value carried by each atom.
    """

    grid: tuple[float, ...]
    values: tuple[float, ...]
    space: MeasureSpace = field(default_factory=unit_interval)

    def __post_init__(self):
        grid = tuple(float(g) for g in self.grid)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if len(grid) < 2:
            raise DomainError("sampled functions need at least two grid points")
        if len(values) != len(grid):
            raise DomainError("grid and values must have equal length")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError("grid must be strictly increasing")
        if not all(math.isfinite(v) for v in values):
            raise DomainError("sampled values must be finite")
        if self.space.kind == FINITE_DISCRETE:
            if not all(self.space.contains(grid)):
                raise DomainError("grid entries must be atom indices of the space")
        elif not (grid[0] >= 0.0 and grid[-1] < self.space.upper):
            raise DomainError("grid must lie inside the domain")

    @cached_property
    def _grid(self) -> np.ndarray:
        g = np.array(self.grid)
        g.flags.writeable = False
        return g

    @cached_property
    def _values(self) -> np.ndarray:
        v = np.array(self.values)
        v.flags.writeable = False
        return v

    @cached_property
    def piece_measures(self) -> np.ndarray:
        if self.space.kind == FINITE_DISCRETE:
            w = np.array(self.space.weights)[self._grid.astype(int)]
        else:
            w = np.diff(np.append(self._grid, self.space.upper))
        w.flags.writeable = False
        return w

    def pieces(self):
        """Yield ``(lo, hi, value)`` for continuous spaces."""
        ends = np.append(self._grid[1:], self.space.upper)
        return list(zip(self._grid.tolist(), ends.tolist(), self._values.tolist()))


@dataclass(frozen=True)
class Indicator(FunctionRep):
    """``height`` times the indicator of a union of disjoint ``[lo, hi)`` intervals."""

    intervals: tuple[tuple[float, float], ...]
    space: MeasureSpace = field(default_factory=unit_interval)
    height: float = 1.0

    def __post_init__(self):
        if not self.space.is_continuous:
            raise DomainError("indicators need a continuous measure space")
        ivs = tuple(sorted((float(lo), float(hi)) for lo, hi in self.intervals))
        object.__setattr__(self, "intervals", ivs)
        for lo, hi in ivs:
            if not (0.0 <= lo < hi <= self.space.upper) or math.isinf(hi):
                raise DomainError(f"interval ({lo}, {hi}) is empty or leaves the domain")
        for (_, h1), (l2, _) in zip(ivs, ivs[1:]):
            if l2 < h1:
                raise DomainError("indicator intervals must be disjoint")
        if not math.isfinite(self.height):
            raise DomainError("height must be finite")

    @property
    def measure(self) -> float:
        return math.fsum(hi - lo for lo, hi in self.intervals)


@dataclass(frozen=True)
class TailDefined(FunctionRep):
    tail: object  # a qgls.tails.TailFunction
    space: MeasureSpace = field(default_factory=unit_interval)

    @property
    def evaluable(self) -> bool:
        return False


def evaluate(f: FunctionRep, x):
    """Value of ``|f|`` (PowerLog) or ``f`` (other variants) at ``x``."""
    if isinstance(f, TailDefined):
        raise EvaluationUnsupported("a tail-defined function has no pointwise values")
    xa = np.asarray(x, dtype=float)
    if not np.all(f.space.contains(xa)):
        raise DomainError(f"point(s) {x!r} outside the domain of {f.space.kind}")
    if isinstance(f, PowerLog):
        out = np.exp(f.log_abs_at_depth(-np.log(xa)))
    elif isinstance(f, Sampled):
        if f.space.kind == FINITE_DISCRETE:
            lookup = dict(zip(f.grid, f.values))
            out = np.vectorize(lambda t: lookup.get(float(t), 0.0), otypes=[float])(xa)
        else:
            idx = np.searchsorted(f._grid, xa, side="right") - 1
            out = np.where(idx >= 0, f._values[np.clip(idx, 0, None)], 0.0)
    elif isinstance(f, Indicator):
        out = np.zeros_like(xa)
        for lo, hi in f.intervals:
            out = np.where((xa >= lo) & (xa < hi), f.height, out)
    else:
        raise EvaluationUnsupported(f"cannot evaluate {type(f).__name__}")
    return float(out) if np.ndim(out) == 0 else out


def sup_abs(f: FunctionRep) -> float:
    """Essential supremum of ``|f|``."""
    if isinstance(f, PowerLog):
        return math.inf if f.scale else 0.0
    if isinstance(f, Sampled):
        v = np.abs(f._values)[f.piece_measures > 0]
        return float(v.max()) if v.size else 0.0
    if isinstance(f, Indicator):
        return abs(f.height)
    raise EvaluationUnsupported(f"no supremum available for {type(f).__name__}")


def to_sampled(f: FunctionRep) -> Sampled:
    if isinstance(f, Sampled):
        return f
    if isinstance(f, Indicator):
        pts = {0.0}
        for lo, hi in f.intervals:
            pts.update((lo, hi))
        pts.discard(f.space.upper)
        grid = sorted(pts)
        if len(grid) < 2:
            grid.append(grid[0] + 0.5 * (f.space.upper - grid[0]) if f.space.kind == UNIT_INTERVAL else grid[0] + 1.0)
        vals = evaluate_closed(f, np.array(grid))
        return Sampled(tuple(grid), tuple(vals.tolist()), f.space)
    raise EvaluationUnsupported(f"{type(f).__name__} has no exact piecewise-constant form")


def evaluate_closed(f: FunctionRep, x: np.ndarray) -> np.ndarray:
    """Like :func:`evaluate` but accepts the left endpoint 0 of the domain."""
    if isinstance(f, Indicator):
        out = np.zeros_like(x, dtype=float)
        for lo, hi in f.intervals:
            out = np.where((x >= lo) & (x < hi), f.height, out)
        return out
    if isinstance(f, Sampled) and f.space.is_continuous:
        idx = np.searchsorted(f._grid, x, side="right") - 1
        return np.where(idx >= 0, f._values[np.clip(idx, 0, None)], 0.0)
    return np.asarray(evaluate(f, x), dtype=float)


def scaled(f: FunctionRep, alpha: float) -> FunctionRep:
    """The function ``alpha * f``."""
    alpha = float(alpha)
    if isinstance(f, PowerLog):
        return PowerLog(f.big_delta, f.delta, f.slowly_varying, f.scale * alpha)
    if isinstance(f, Sampled):
        return Sampled(f.grid, tuple(alpha * v for v in f.values), f.space)
    if isinstance(f, Indicator):
        return Indicator(f.intervals, f.space, f.height * alpha)
    raise EvaluationUnsupported(f"cannot scale {type(f).__name__}")


def add(f: FunctionRep, g: FunctionRep) -> Sampled:
    """Exact pointwise sum of two piecewise-constant functions on one space."""
    if f.space != g.space:
        raise DomainError("summands live on different measure spaces")
    fs, gs = to_sampled(f), to_sampled(g)
    if fs.space.kind == FINITE_DISCRETE:
        grid = sorted(set(fs.grid) | set(gs.grid))
        if len(grid) < 2:
            raise DomainError("sum supported on a single atom cannot be sampled")
        lf, lg = dict(zip(fs.grid, fs.values)), dict(zip(gs.grid, gs.values))
        return Sampled(tuple(grid), tuple(lf.get(t, 0.0) + lg.get(t, 0.0) for t in grid), fs.space)
    grid = np.union1d(fs._grid, gs._grid)
    vals = evaluate_closed(fs, grid) + evaluate_closed(gs, grid)
    return Sampled(tuple(grid.tolist()), tuple(vals.tolist()), fs.space)


def restrict(f: FunctionRep, lo: float, hi: float) -> Sampled:
    """``f`` times the indicator of ``[lo, hi)`` (piecewise-constant ``f`` only)."""
    fs = to_sampled(f)
    if not fs.space.is_continuous:
        raise DomainError("restriction to intervals needs a continuous space")
    if not lo < hi:
        raise DomainError("empty restriction window")
    pts = np.union1d(fs._grid, [lo, hi])
    pts = pts[pts < fs.space.upper]
    vals = evaluate_closed(fs, pts)
    vals = np.where((pts >= lo) & (pts < hi), vals, 0.0)
    return Sampled(tuple(pts.tolist()), tuple(vals.tolist()), fs.space)


def dilate(f: FunctionRep, s: float) -> FunctionRep:
    """``x -> f(x / s)`` on the half line."""
    if not s > 0:
        raise DomainError("dilation factor must be positive")
    if f.space.kind != HALF_LINE:
        raise DomainError("dilations act on functions over the half line")
    if isinstance(f, Indicator):
        return Indicator(tuple((s * lo, s * hi) for lo, hi in f.intervals), f.space, f.height)
    if isinstance(f, Sampled):
        return Sampled(tuple(s * g for g in f.grid), f.values, f.space)
    raise EvaluationUnsupported(f"cannot dilate {type(f).__name__}")


def multiply(w: Sampled, f: FunctionRep) -> Sampled:
    """Pointwise product of two piecewise-constant functions."""
    ws, fs = to_sampled(w), to_sampled(f)
    if ws.space != fs.space or not ws.space.is_continuous:
        raise DomainError("multiplication needs both factors on one continuous space")
    grid = np.union1d(ws._grid, fs._grid)
    vals = evaluate_closed(ws, grid) * evaluate_closed(fs, grid)
    return Sampled(tuple(grid.tolist()), tuple(vals.tolist()), fs.space)
