"""``qgls`` command line.

Exit status: 0 on success, 1 on a computation error or failed verification,
2 on a configuration error.  Errors are written to stderr as a JSON object.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import config as cfgmod
from .errors import ConfigError, QglsError
from .fixedpoint import TRIANGLE_SQUARED, sampled_sine_problem, scalar_scaling_problem, solve
from .gls import boyd_indices, fundamental_bounds_check, gls_norm, natural_function
from .measure import Indicator, half_line
from .quasinorm import DEFAULT_REL_TOL, lp_quasinorm
from .serialize import dumps, to_csv
from .tails import gap_law_slope, optimal_p_tail_estimate, tcheby_tail_bound
from .transfer import Dilation, Identity, Multiplication, verify_transfer_norm
from .verification import SUITES, run_suites


class _Usage(Exception):
    """Raised instead of argparse's own exit so errors stay machine readable."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qgls", description="Quasi-Grand Lebesgue space toolkit")
    sub = ap.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name in cfgmod.SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--input", "-i", help="JSON configuration file ('-' for stdin)")
        sp.add_argument("--output", "-o", help="output file (default stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--tol", type=float, help="relative tolerance override")
        if name == "norm":
            sp.add_argument("--p", type=float, help="exponent (overrides the config)")
        if name == "verify":
            sp.add_argument("--suite", action="append", choices=sorted(SUITES),
                            help="run only this suite (repeatable)")
        if name == "fixpoint":
            sp.add_argument("--mode", choices=("triangle_squared", "quadrilateral"))
    return ap


def _read_input(path: Optional[str]) -> str:
    if path is None:
        return ""
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ConfigError("--input", f"cannot read {path}: {exc.strerror}") from exc


def _with_overrides(cfg: cfgmod.Config, args) -> cfgmod.Config:
    fields = dict(cfg.fields)
    if args.tol is not None:
        if not (args.tol > 0 and math.isfinite(args.tol)):
            raise ConfigError("--tol", "tolerance must be positive")
        fields["tol"] = args.tol
    if getattr(args, "p", None) is not None:
        fields["p"] = args.p
        fields.pop("p_grid", None)
    if getattr(args, "mode", None) is not None:
        fields["mode"] = args.mode
    if getattr(args, "suite", None):
        fields["suites"] = tuple(args.suite)
    return cfgmod.Config(cfg.subcommand, tuple(sorted(fields.items())))


# --- handlers: each returns (json_payload, csv_header, csv_rows, ok) --------------

def _norm(c: cfgmod.Config, tol):
    f = c.get("function")
    ps = c.get("p_grid") or ((c.get("p"),) if c.get("p") is not None else None)
    if ps is None:
        raise ConfigError("p", "give p (config or --p) or p_grid")
    results = [lp_quasinorm(f, p, tol) for p in ps]
    rows = [(r.p, r.value, r.abs_error_estimate, r.converged) for r in results]
    as_dict = [{"p": r.p, "value": r.value, "abs_error_estimate": r.abs_error_estimate,
                "converged": r.converged} for r in results]
    payload = as_dict[0] if c.get("p_grid") is None else {"results": as_dict}
    return payload, ("p", "value", "abs_error_estimate", "converged"), rows, True


def _gls(c, tol):
    r = gls_norm(c.get("function"), c.get("psi"), tol)
    payload = {"value": r.value, "argmax_p": r.argmax_p, "endpoint_limit": r.endpoint_limit,
               "profile": [{"p": p, "norm": n, "psi": s, "ratio": q} for p, n, s, q in r.profile]}
    return payload, ("p", "norm", "psi", "ratio"), r.profile, True


def _natural(c, tol):
    psi = natural_function(c.get("function"), c.get("a"), c.get("b"), c.get("grid_size") or 65, tol)
    rows = list(zip(psi.nodes, psi.values))
    payload = {"psi": cfgmod.psi_doc(psi)}
    return payload, ("p", "psi"), rows, True


def _fundamental(c, tol):
    psi = c.get("psi")
    deltas = c.get("delta_grid") or tuple(np.geomspace(1e-6, 1.0, 50).tolist())
    rep = fundamental_bounds_check(psi, deltas)
    rows = [(d, lo, phi, up, lok and uok) for d, lo, phi, up, lok, uok in rep.rows]
    payload = {"all_hold": rep.all_hold,
               "rows": [{"delta": d, "lower": lo, "phi": phi, "upper": up, "holds": ok}
                        for d, lo, phi, up, ok in rows]}
    return payload, ("delta", "lower", "phi", "upper", "holds"), rows, True


def _tail(c, tol):
    m = c.get("tail_model")
    if m is not None:
        rep = optimal_p_tail_estimate(m.b, m.gamma, m.slowly_varying, c=m.c, coef=m.coef,
                                      log_x_grid=m.log_x_grid, tol=tol)
        rows = list(zip(rep.log_u, rep.p_used, rep.log_tail, rep.log_optimal_p, rep.gap_ratio))
        payload = {"gap_law_slope": gap_law_slope(rep), "bounds_hold": rep.bounds_hold,
                   "rows": [{"log_x": a, "p": p, "log_tail": t, "log_bound": b, "gap_ratio": g}
                            for a, p, t, b, g in rows]}
        return payload, ("log_x", "p", "log_tail", "log_bound", "gap_ratio"), rows, True
    rep = tcheby_tail_bound(c.get("function"), c.get("psi"), c.get("u_grid"), tol=tol)
    rows = list(zip(rep.u_grid, rep.exact_or_empirical_tail, rep.tcheby_bound, rep.norm_bound, rep.gap_ratio))
    payload = {"bounds_hold": rep.bounds_hold,
               "rows": [{"u": u, "tail": t, "tcheby": b, "norm_bound": nb, "gap_ratio": g}
                        for u, t, b, nb, g in rows]}
    return payload, ("u", "tail", "tcheby", "norm_bound", "gap_ratio"), rows, True


def _boyd(c, tol):
    probe = c.get("probe") or Indicator(((0.0, 1.0),), half_line())
    exps = c.get("s_exponents")
    grid = None if exps is None else tuple(2.0 ** -k for k in exps) + tuple(2.0 ** k for k in exps)
    est = boyd_indices(c.get("psi"), probe, grid, tol=tol)
    rows = [(math.log(s), lr) for s, lr in zip(est.s_grid, est.log_ratios)]
    payload = {"gamma1": est.gamma1, "gamma2": est.gamma2,
               "rows": [{"log_s": a, "log_ratio": b} for a, b in rows]}
    return payload, ("log_s", "log_ratio"), rows, True


def _fixpoint(c, tol):
    spec = c.get("problem")
    params = dict(spec.params)
    if spec.kind == "scalar_scaling":
        problem, ref = scalar_scaling_problem(**params), np.asarray(0.0)
    else:
        problem, ref = sampled_sine_problem(**params)
    cert = solve(problem, c.get("mode") or TRIANGLE_SQUARED, c.get("target"),
                 c.get("max_iter") if c.get("max_iter") is not None else 50, reference=ref)
    payload = cert.to_dict()
    payload["reference_dists"] = list(cert.reference_dists)
    payload["sound"] = cert.sound
    rows = [(i, s, b, r) for i, (s, b, r) in enumerate(zip(cert.step_dists, cert.bounds, cert.reference_dists))]
    return payload, ("n", "step_dist", "bound", "reference_dist"), rows, cert.sound


def _transfer(c, tol):
    spec = c.get("operator")
    op = {"identity": lambda: Identity(), "dilation": lambda: Dilation(spec.s),
          "multiplication": lambda: Multiplication(spec.weight)}[spec.kind]()
    rep = verify_transfer_norm(op, c.get("theta"), c.get("psi"), c.get("corpus"))
    rows = list(enumerate(rep.ratios))
    return rep.to_dict(), ("id", "ratio"), rows, True


def _verify(c, tol):
    suites = c.get("suites")
    if suites:
        bad = [s for s in suites if s not in SUITES]
        if bad:
            raise ConfigError("suites", f"unknown suite {bad[0]!r}")
    checks = run_suites(suites)
    ok = all(ch.passed for ch in checks)
    payload = {"all_passed": ok, "checks": [ch.to_dict() for ch in checks]}
    rows = [(ch.suite, ch.check, ch.passed, ch.value, ch.limit) for ch in checks]
    return payload, ("suite", "check", "passed", "value", "limit"), rows, ok


HANDLERS = {"norm": _norm, "gls-norm": _gls, "natural-fn": _natural, "fundamental": _fundamental,
            "tail": _tail, "boyd": _boyd, "fixpoint": _fixpoint, "transfer": _transfer, "verify": _verify}


def _fail(code: int, obj: dict) -> int:
    sys.stderr.write(dumps(obj))
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _Usage as exc:
        return _fail(2, {"error": "usage", "message": str(exc)})
    try:
        cfg = cfgmod.load_config(_read_input(args.input), args.subcommand)
        cfg = _with_overrides(cfg, args)
        tol = cfg.get("tol", DEFAULT_REL_TOL)
        payload, header, rows, ok = HANDLERS[args.subcommand](cfg, tol)
    except ConfigError as exc:
        return _fail(2, {"error": "config", "path": exc.path, "message": str(exc)})
    except QglsError as exc:
        return _fail(1, {"error": type(exc).__name__, "message": str(exc)})

    if args.format == "json":
        payload = dict(payload)
        payload["config"] = cfgmod.echo(cfg)
        text = dumps(payload)
    else:
        text = to_csv(header, rows)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
