"""Fail-closed JSON configuration documents.

Every object is read through :class:`_Reader`, which rejects unknown keys and
reports the offending location as a dotted path (``function.grid[2]``).
:func:`echo` turns a parsed configuration back into a document that parses
to an equal configuration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .errors import ConfigError, QglsError
from .measure import (FINITE_DISCRETE, HALF_LINE, UNIT_INTERVAL, FunctionRep, Indicator, MeasureSpace,
                      PowerLog, Sampled, SlowlyVarying, TailDefined)
from .psi import (BandaliyevPsi, ConstantPsi, IwaniecSbordonePsi, PsiFunction, TabulatedPsi,
                  TailModelPsi)
from .serialize import decode_float
from .tails import AnalyticTail, StepTail
from .transfer import CONSTANT, POWER_OF_S, TABULATED, OperatorBoundProfile

SUBCOMMANDS = ("norm", "gls-norm", "natural-fn", "fundamental", "tail", "boyd", "fixpoint", "transfer", "verify")


class _Reader:
    def __init__(self, doc, path: str):
        if not isinstance(doc, dict):
            raise ConfigError(path or "$", "expected an object")
        self.doc, self.path, self.used = doc, path, set()

    def _sub(self, key):
        return f"{self.path}.{key}" if self.path else key

    def has(self, key) -> bool:
        return key in self.doc

    def raw(self, key, default=None, required=False):
        if key not in self.doc:
            if required:
                raise ConfigError(self._sub(key), "missing required field")
            return default
        self.used.add(key)
        return self.doc[key]

    def num(self, key, default=None, required=False) -> Optional[float]:
        v = self.raw(key, default, required)
        if key not in self.doc:
            return v
        return _number(v, self._sub(key))

    def integer(self, key, default=None, required=False) -> Optional[int]:
        v = self.raw(key, default, required)
        if key not in self.doc:
            return v
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(self._sub(key), "expected an integer")
        return v

    def text(self, key, default=None, required=False, choices=None) -> Optional[str]:
        v = self.raw(key, default, required)
        if key not in self.doc:
            return v
        if not isinstance(v, str):
            raise ConfigError(self._sub(key), "expected a string")
        if choices is not None and v not in choices:
            raise ConfigError(self._sub(key), f"expected one of {list(choices)}, got {v!r}")
        return v

    def nums(self, key, default=None, required=False) -> Optional[tuple]:
        v = self.raw(key, default, required)
        if key not in self.doc:
            return v
        if not isinstance(v, list):
            raise ConfigError(self._sub(key), "expected an array of numbers")
        return tuple(_number(x, f"{self._sub(key)}[{i}]") for i, x in enumerate(v))

    def obj(self, key, parser: Callable, default=None, required=False):
        v = self.raw(key, default, required)
        if key not in self.doc:
            return v
        return parser(v, self._sub(key))

    def finish(self):
        extra = sorted(set(self.doc) - self.used)
        if extra:
            raise ConfigError(self._sub(extra[0]), "unknown field")


def _number(v, path) -> float:
    if isinstance(v, bool):
        raise ConfigError(path, "expected a number")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        try:
            return decode_float(v)
        except ValueError:
            pass
    raise ConfigError(path, "expected a number")


def _build(path, ctor, *args, **kw):
    """Run a constructor, re-labelling validation errors with the config path."""
    try:
        return ctor(*args, **kw)
    except QglsError as exc:
        raise ConfigError(path, str(exc)) from exc


# --- components ---------------------------------------------------------------

def parse_slowly_varying(doc, path) -> SlowlyVarying:
    r = _Reader(doc, path)
    kind = r.text("kind", required=True, choices=("one", "log_power"))
    kappa = r.num("kappa", 0.0)
    r.finish()
    return _build(path, SlowlyVarying, kind, kappa)


def parse_space(doc, path) -> MeasureSpace:
    r = _Reader(doc, path)
    kind = r.text("kind", required=True, choices=(UNIT_INTERVAL, HALF_LINE, FINITE_DISCRETE))
    weights = r.nums("weights", ())
    r.finish()
    if kind != FINITE_DISCRETE and weights:
        raise ConfigError(f"{path}.weights", "weights are only allowed for finite_discrete")
    return _build(path, MeasureSpace, kind, weights)


def parse_psi(doc, path="psi") -> PsiFunction:
    r = _Reader(doc, path)
    kind = r.text("kind", required=True,
                  choices=("constant", "iwaniec_sbordone", "bandaliyev", "tail_model", "tabulated"))
    b = r.num("b", required=True)
    if kind == "bandaliyev":
        a = r.num("a", b / 2.0)
        r.finish()
        return _build(path, BandaliyevPsi, b, a)
    a = r.num("a", required=True)
    if kind == "constant":
        c = r.num("c", 1.0)
        r.finish()
        return _build(path, ConstantPsi, a, b, c)
    if kind == "iwaniec_sbordone":
        theta = r.num("theta", 1.0)
        r.finish()
        return _build(path, IwaniecSbordonePsi, a, b, theta)
    if kind == "tail_model":
        gamma = r.num("gamma", 0.0)
        sv = r.obj("slowly_varying", parse_slowly_varying, SlowlyVarying())
        r.finish()
        return _build(path, TailModelPsi, a, b, gamma, sv)
    nodes = r.nums("nodes", required=True)
    values = r.nums("values", required=True)
    r.finish()
    return _build(path, TabulatedPsi, a, b, nodes, values)


def parse_tail(doc, path) -> Any:
    r = _Reader(doc, path)
    kind = r.text("kind", required=True, choices=("analytic", "step"))
    if kind == "analytic":
        coef = r.num("coef", 1.0)
        b = r.num("b", required=True)
        gamma = r.num("gamma", 0.0)
        sv = r.obj("slowly_varying", parse_slowly_varying, SlowlyVarying())
        mass = r.num("mass", 1.0)
        r.finish()
        return _build(path, AnalyticTail, coef, b, gamma, sv, mass)
    levels = r.nums("levels", required=True)
    masses = r.nums("masses", required=True)
    r.finish()
    if len(levels) != len(masses):
        raise ConfigError(f"{path}.masses", "levels and masses must have equal length")
    if any(q >= p for p, q in zip(levels, levels[1:])) or any(v <= 0 for v in levels + masses):
        raise ConfigError(f"{path}.levels", "levels must be positive and strictly decreasing; masses positive")
    return StepTail(levels, masses)


def parse_function(doc, path="function") -> FunctionRep:
    r = _Reader(doc, path)
    variant = r.text("variant", required=True, choices=("power_log", "sampled", "indicator", "tail_defined"))
    if variant == "power_log":
        big = r.num("big_delta", required=True)
        delta = r.num("delta", 0.0)
        sv = r.obj("slowly_varying", parse_slowly_varying, SlowlyVarying())
        scale = r.num("scale", 1.0)
        if r.has("space"):
            sp = r.obj("space", parse_space)
            if sp.kind != UNIT_INTERVAL:
                raise ConfigError(f"{path}.space", "power_log functions live on the unit interval")
        r.finish()
        return _build(path, PowerLog, big, delta, sv, scale)
    space = r.obj("space", parse_space, MeasureSpace(UNIT_INTERVAL))
    if variant == "sampled":
        grid = r.nums("grid", required=True)
        values = r.nums("values", required=True)
        r.finish()
        return _build(path, Sampled, grid, values, space)
    if variant == "indicator":
        iv = r.raw("intervals", required=True)
        if not isinstance(iv, list) or not iv:
            raise ConfigError(f"{path}.intervals", "expected a non-empty array of [lo, hi] pairs")
        intervals = []
        for i, pair in enumerate(iv):
            if not (isinstance(pair, list) and len(pair) == 2):
                raise ConfigError(f"{path}.intervals[{i}]", "expected [lo, hi]")
            intervals.append((_number(pair[0], f"{path}.intervals[{i}][0]"),
                              _number(pair[1], f"{path}.intervals[{i}][1]")))
        height = r.num("height", 1.0)
        r.finish()
        return _build(path, Indicator, tuple(intervals), space, height)
    tail = r.obj("tail", parse_tail, required=True)
    r.finish()
    return _build(path, TailDefined, tail, space)


def parse_theta(doc, path, a, b) -> OperatorBoundProfile:
    r = _Reader(doc, path)
    kind = r.text("kind", required=True, choices=(CONSTANT, POWER_OF_S, TABULATED))
    a = r.num("a", a)
    b = r.num("b", b)
    if a is None or b is None:
        raise ConfigError(path, "a and b are required when no psi is given")
    kw: dict = {}
    if kind == CONSTANT:
        kw["c"] = r.num("c", 1.0)
    elif kind == POWER_OF_S:
        kw["s"] = r.num("s", required=True)
    else:
        kw["nodes"] = r.nums("nodes", required=True)
        kw["values"] = r.nums("values", required=True)
    r.finish()
    return _build(path, OperatorBoundProfile, kind, a, b, **kw)


@dataclass(frozen=True)
class OperatorSpec:
    kind: str  # identity | dilation | multiplication
    s: float = 1.0
    weight: Optional[Sampled] = None


def parse_operator(doc, path) -> OperatorSpec:
    r = _Reader(doc, path)
    kind = r.text("kind", required=True, choices=("identity", "dilation", "multiplication"))
    if kind == "dilation":
        s = r.num("s", required=True)
        r.finish()
        if not s > 0:
            raise ConfigError(f"{path}.s", "dilation factor must be positive")
        return OperatorSpec(kind, s=s)
    if kind == "multiplication":
        w = r.obj("weight", parse_function, required=True)
        r.finish()
        if not isinstance(w, Sampled):
            raise ConfigError(f"{path}.weight", "the weight must be a sampled function")
        return OperatorSpec(kind, weight=w)
    r.finish()
    return OperatorSpec(kind)


@dataclass(frozen=True)
class ProblemSpec:
    kind: str  # scalar_scaling | sampled_sine
    params: tuple  # sorted (name, value) pairs


_PROBLEM_FIELDS = {
    "scalar_scaling": {"factor": (float, 1.0 / 3.0), "x0": (float, 1.0)},
    "sampled_sine": {"n_pieces": (int, 64), "p": (float, 0.8), "alpha": (float, 0.6), "seed": (int, 0)},
}


def parse_problem(doc, path) -> ProblemSpec:
    r = _Reader(doc, path)
    kind = r.text("kind", required=True, choices=tuple(_PROBLEM_FIELDS))
    params = []
    for name, (typ, default) in sorted(_PROBLEM_FIELDS[kind].items()):
        params.append((name, r.integer(name, default) if typ is int else r.num(name, default)))
    r.finish()
    return ProblemSpec(kind, tuple(params))


# --- whole documents ----------------------------------------------------------

@dataclass(frozen=True)
class Config:
    subcommand: str
    fields: tuple = field(default=())  # sorted (name, value) pairs

    def get(self, key, default=None):
        return dict(self.fields).get(key, default)


def _corpus(doc, path):
    if not isinstance(doc, list) or not doc:
        raise ConfigError(path, "expected a non-empty array of functions")
    return tuple(parse_function(f, f"{path}[{i}]") for i, f in enumerate(doc))


def parse_config(doc, subcommand: str) -> Config:
    """Validate a configuration document for ``subcommand``."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigError("$", f"unknown subcommand {subcommand!r}")
    r = _Reader(doc if doc is not None else {}, "")
    out: dict = {}

    def put(key, value):
        if value is not None:
            out[key] = value

    put("tol", r.num("tol"))
    if subcommand == "norm":
        put("function", r.obj("function", parse_function, required=True))
        put("p", r.num("p"))
        put("p_grid", r.nums("p_grid"))
    elif subcommand == "gls-norm":
        put("function", r.obj("function", parse_function, required=True))
        put("psi", r.obj("psi", parse_psi, required=True))
    elif subcommand == "natural-fn":
        put("function", r.obj("function", parse_function, required=True))
        put("a", r.num("a", required=True))
        put("b", r.num("b", required=True))
        put("grid_size", r.integer("grid_size"))
    elif subcommand == "fundamental":
        put("psi", r.obj("psi", parse_psi, required=True))
        put("delta_grid", r.nums("delta_grid"))
    elif subcommand == "tail":
        if r.has("tail_model"):
            put("tail_model", r.obj("tail_model", _parse_tail_model))
        else:
            put("function", r.obj("function", parse_function, required=True))
            put("psi", r.obj("psi", parse_psi, required=True))
            put("u_grid", r.nums("u_grid", required=True))
    elif subcommand == "boyd":
        put("psi", r.obj("psi", parse_psi, required=True))
        put("probe", r.obj("probe", parse_function))
        put("s_exponents", r.nums("s_exponents"))
    elif subcommand == "fixpoint":
        put("problem", r.obj("problem", parse_problem, required=True))
        put("mode", r.text("mode", choices=("triangle_squared", "quadrilateral")))
        put("max_iter", r.integer("max_iter"))
        put("target", r.num("target"))
    elif subcommand == "transfer":
        psi = r.obj("psi", parse_psi, required=True)
        put("psi", psi)
        put("operator", r.obj("operator", parse_operator, required=True))
        put("theta", r.obj("theta", lambda d, p: parse_theta(d, p, psi.a, psi.b), required=True))
        put("corpus", r.obj("corpus", _corpus, required=True))
    elif subcommand == "verify":
        suites = r.raw("suites")
        if suites is not None:
            if not (isinstance(suites, list) and all(isinstance(s, str) for s in suites)):
                raise ConfigError("suites", "expected an array of suite names")
            put("suites", tuple(suites))
    r.finish()
    return Config(subcommand, tuple(sorted(out.items())))


@dataclass(frozen=True)
class TailModelSpec:
    b: float
    gamma: float
    slowly_varying: SlowlyVarying
    c: float
    coef: float
    log_x_grid: tuple


def _parse_tail_model(doc, path) -> TailModelSpec:
    r = _Reader(doc, path)
    b = r.num("b", required=True)
    gamma = r.num("gamma", 0.0)
    sv = r.obj("slowly_varying", parse_slowly_varying, SlowlyVarying())
    c = r.num("c", None)
    coef = r.num("coef", 1.0)
    lx = r.nums("log_x_grid", tuple(float(2 ** k) for k in range(1, 11)))
    r.finish()
    if not 0 < b < 1:
        raise ConfigError(f"{path}.b", "b must lie in (0, 1)")
    return TailModelSpec(b, gamma, sv, b / 2.0 if c is None else c, coef, tuple(lx))


def load_config(text: str, subcommand: str) -> Config:
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc.msg} at line {exc.lineno}") from exc
    return parse_config(doc, subcommand)


# --- echo ---------------------------------------------------------------------

def _sv_doc(sv: SlowlyVarying) -> dict:
    return {"kind": sv.kind, "kappa": sv.kappa}


def _space_doc(sp: MeasureSpace) -> dict:
    d: dict = {"kind": sp.kind}
    if sp.kind == FINITE_DISCRETE:
        d["weights"] = list(sp.weights)
    return d


def psi_doc(psi: PsiFunction) -> dict:
    if isinstance(psi, ConstantPsi):
        return {"kind": "constant", "a": psi.a, "b": psi.b, "c": psi.c}
    if isinstance(psi, IwaniecSbordonePsi):
        return {"kind": "iwaniec_sbordone", "a": psi.a, "b": psi.b, "theta": psi.theta}
    if isinstance(psi, BandaliyevPsi):
        return {"kind": "bandaliyev", "a": psi.a, "b": psi.b}
    if isinstance(psi, TailModelPsi):
        return {"kind": "tail_model", "a": psi.a, "b": psi.b, "gamma": psi.gamma,
                "slowly_varying": _sv_doc(psi.slowly_varying)}
    if isinstance(psi, TabulatedPsi):
        return {"kind": "tabulated", "a": psi.a, "b": psi.b, "nodes": list(psi.nodes), "values": list(psi.values)}
    raise TypeError(f"no config form for {type(psi).__name__}")


def _tail_doc(t) -> dict:
    if isinstance(t, AnalyticTail):
        return {"kind": "analytic", "coef": t.coef, "b": t.b, "gamma": t.gamma,
                "slowly_varying": _sv_doc(t.slowly_varying), "mass": t.mass}
    return {"kind": "step", "levels": list(t.levels), "masses": list(t.masses)}


def function_doc(f: FunctionRep) -> dict:
    if isinstance(f, PowerLog):
        return {"variant": "power_log", "big_delta": f.big_delta, "delta": f.delta,
                "slowly_varying": _sv_doc(f.slowly_varying), "scale": f.scale}
    if isinstance(f, Sampled):
        return {"variant": "sampled", "grid": list(f.grid), "values": list(f.values), "space": _space_doc(f.space)}
    if isinstance(f, Indicator):
        return {"variant": "indicator", "intervals": [list(iv) for iv in f.intervals],
                "height": f.height, "space": _space_doc(f.space)}
    if isinstance(f, TailDefined):
        return {"variant": "tail_defined", "tail": _tail_doc(f.tail), "space": _space_doc(f.space)}
    raise TypeError(f"no config form for {type(f).__name__}")


def _echo_value(key, v):
    if isinstance(v, PsiFunction):
        return psi_doc(v)
    if isinstance(v, FunctionRep):
        return function_doc(v)
    if key == "corpus":
        return [function_doc(f) for f in v]
    if isinstance(v, OperatorBoundProfile):
        d = {"kind": v.kind, "a": v.a, "b": v.b}
        if v.kind == CONSTANT:
            d["c"] = v.c
        elif v.kind == POWER_OF_S:
            d["s"] = v.s
        else:
            d.update(nodes=list(v.nodes), values=list(v.values))
        return d
    if isinstance(v, OperatorSpec):
        d = {"kind": v.kind}
        if v.kind == "dilation":
            d["s"] = v.s
        if v.kind == "multiplication":
            d["weight"] = function_doc(v.weight)
        return d
    if isinstance(v, ProblemSpec):
        return {"kind": v.kind, **dict(v.params)}
    if isinstance(v, TailModelSpec):
        return {"b": v.b, "gamma": v.gamma, "slowly_varying": _sv_doc(v.slowly_varying), "c": v.c,
                "coef": v.coef, "log_x_grid": list(v.log_x_grid)}
    if isinstance(v, tuple):
        return list(v)
    return v


def echo(cfg: Config) -> dict:
    """Canonical document form of a parsed configuration."""
    return {k: _echo_value(k, v) for k, v in cfg.fields}

