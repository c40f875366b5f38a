"""Deterministic self-check suites behind ``qgls verify``.

Each suite returns :class:`Check` rows.  Random inputs come from fixed seeds,
and no timing or host information enters the output, so repeated runs emit
identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .errors import BoundViolated, ConditionViolated
from .fixedpoint import (MODES, TRIANGLE_SQUARED, ContractionProblem, sampled_sine_problem,
                         scalar_scaling_problem, solve, squared_distance_space, spot_check_space)
from .gls import (boyd_indices, collapse_demo, fundamental_bounds_check, fundamental_function, gls_norm,
                  gls_quasi_triangle_check, natural_function)
from .measure import Indicator, PowerLog, Sampled, SlowlyVarying, half_line, unit_interval
from .psi import BandaliyevPsi, ConstantPsi, IwaniecSbordonePsi, psi_eval, tail_model_psi
from .quasinorm import (aoki_rolewicz_power, double_inequality, geometric_mean_limit, lp_quasinorm,
                        quasi_triangle_check, quasi_triangle_constant)
from .tails import gap_law_slope, norm_from_tail, optimal_p_tail_estimate, tail_of, tcheby_tail_bound
from .transfer import Dilation, Identity, constant_theta, dilation_theta, verify_transfer_norm


@dataclass(frozen=True)
class Check:
    suite: str
    check: str
    passed: bool
    value: Optional[float] = None
    limit: Optional[float] = None

    def to_dict(self) -> dict:
        return {"suite": self.suite, "check": self.check, "passed": bool(self.passed),
                "value": self.value, "limit": self.limit}


def _rel(x, y):
    return abs(x - y) / abs(y)


def random_sampled(rng, n_max=8, space=None) -> Sampled:
    n = int(rng.integers(2, n_max + 1))
    grid = np.sort(rng.choice(np.arange(1, 1000), size=n - 1, replace=False)) / 1000.0
    grid = np.concatenate([[0.0], grid])
    vals = rng.normal(size=n) * rng.choice([0.1, 1.0, 10.0], size=n)
    return Sampled(tuple(grid.tolist()), tuple(vals.tolist()), space or unit_interval())


def suite_measure() -> List[Check]:
    s = "measure"
    out = []
    v = psi_eval(IwaniecSbordonePsi(0.1, 0.5, 1.0), 0.25)
    out.append(Check(s, "iwaniec_sbordone_value_at_quarter", _rel(v, 256.0) < 1e-12, v, 256.0))
    v = psi_eval(BandaliyevPsi(1.0), 0.75)
    ref = 0.25 ** (-4.0 / 3.0)
    out.append(Check(s, "bandaliyev_value", _rel(v, ref) < 1e-12, v, ref))
    L = SlowlyVarying("log_power", 2.0)
    r = float(L(2e100) / L(1e100))
    out.append(Check(s, "log_power_slow_variation", abs(r - 1) < 0.01, r, 1.0))
    for psi in (IwaniecSbordonePsi(0.2, 0.6, 1.0), BandaliyevPsi(0.8), tail_model_psi(0.5, 1.0)):
        p = np.linspace(psi.a, psi.b, 203)[1:-1]
        grid_min = float(np.min(psi(p)))
        out.append(Check(s, f"inf_psi_below_grid_min:{type(psi).__name__}",
                         grid_min >= psi.inf_psi * (1 - 1e-9), grid_min, psi.inf_psi))
    return out


def suite_quasinorm() -> List[Check]:
    s = "quasinorm"
    out = []
    f = PowerLog(2.0)
    v = lp_quasinorm(f, 0.25).value
    out.append(Check(s, "power_singularity_closed_form", _rel(v, 16.0) < 1e-8, v, 16.0))
    v = lp_quasinorm(f, 0.5).value
    out.append(Check(s, "divergence_at_critical_exponent", v == math.inf, v, math.inf))
    v = lp_quasinorm(Indicator(((0.0, 0.5),)), 0.5).value
    out.append(Check(s, "indicator_norm", _rel(v, 0.25) < 1e-14, v, 0.25))
    v = geometric_mean_limit(f)
    out.append(Check(s, "geometric_mean_limit", _rel(v, math.e ** 2) < 1e-9, v, math.e ** 2))
    rng = np.random.default_rng(11)
    ok, worst = True, 0.0
    for _ in range(50):
        p = float(rng.uniform(0.05, 1.0))
        c = quasi_triangle_check(random_sampled(rng), random_sampled(rng), p)
        ok = ok and bool(c.p_norm_holds) and c.holds
        worst = max(worst, c.worst_ratio_observed / c.constant_claimed)
    out.append(Check(s, "p_norm_and_quasi_triangle_on_random_pairs", ok, worst, 1.0))
    A, B = rng.uniform(0, 5, 100), rng.uniform(0, 5, 100)
    lo, mid, hi = double_inequality(A, B, 0.3)
    out.append(Check(s, "double_inequality", bool(np.all(lo <= mid * (1 + 1e-14)) and np.all(mid <= hi * (1 + 1e-14)))))
    p = aoki_rolewicz_power(quasi_triangle_constant(0.37))
    out.append(Check(s, "aoki_rolewicz_round_trip", abs(p - 0.37) < 1e-14, p, 0.37))
    return out


def suite_quasi_triangle() -> List[Check]:
    s = "quasi-triangle"
    out = []
    rng = np.random.default_rng(7)
    for a in (0.25, 0.5, 0.75):
        psi = ConstantPsi(a, min(1.0, a + 0.25))
        worst = 0.0
        for _ in range(15):
            c = gls_quasi_triangle_check(random_sampled(rng), random_sampled(rng), psi)
            worst = max(worst, c.worst_ratio_observed)
        K = 2.0 ** (1.0 / a - 1.0)
        out.append(Check(s, f"gls_ratio_within_constant:a={a!r}", worst <= K * (1 + 1e-9), worst, K))
    for p in (0.25, 0.5, 0.8):
        c = quasi_triangle_check(Indicator(((0.0, 0.25),)), Indicator(((0.5, 0.75),)), p)
        out.append(Check(s, f"disjoint_indicator_saturation:p={p!r}",
                         abs(c.worst_ratio_observed - c.constant_claimed) <= 1e-12 * c.constant_claimed,
                         c.worst_ratio_observed, c.constant_claimed))
    return out


def suite_gls() -> List[Check]:
    s = "gls"
    out = []
    corpus = [PowerLog(2.0, 1.0), Indicator(((0.1, 0.35),)), Sampled((0.0, 0.3, 0.7), (2.0, -0.5, 4.0))]
    for i, f in enumerate(corpus):
        psi = natural_function(f, 0.1, 0.45, grid_size=33)
        v = gls_norm(f, psi).value
        out.append(Check(s, f"natural_function_normalisation:{i}", abs(v - 1) <= 1e-6, v, 1.0))
    return out


def suite_fundamental() -> List[Check]:
    s = "fundamental"
    out = []
    deltas = np.geomspace(1e-4, 1.0, 10)
    for psi in (ConstantPsi(0.2, 0.7), IwaniecSbordonePsi(0.2, 0.7, 1.0), BandaliyevPsi(0.8),
                tail_model_psi(0.6, 1.0)):
        rep = fundamental_bounds_check(psi, deltas)
        out.append(Check(s, f"bilateral_bounds:{type(psi).__name__}", rep.all_hold))
    psi = ConstantPsi(0.2, 0.7)
    v, ref = fundamental_function(psi, 0.01), 0.01 ** (1 / 0.7)
    out.append(Check(s, "constant_psi_attains_right_bound", _rel(v, ref) < 1e-6, v, ref))
    return out


def suite_tails() -> List[Check]:
    s = "tails"
    out = []
    corpus = [PowerLog(2.0, 1.0), PowerLog(1.5, 0.0, SlowlyVarying("log_power", 1.0)),
              Sampled((0.0, 0.3, 0.7), (2.0, -0.5, 4.0)), Indicator(((0.1, 0.35),), height=3.0)]
    worst = 0.0
    for f in corpus:
        T = tail_of(f)
        for p in (0.1, 0.3, 0.45):
            worst = max(worst, _rel(norm_from_tail(T, p).value, lp_quasinorm(f, p).value))
    out.append(Check(s, "layer_cake_identity", worst <= 1e-6, worst, 1e-6))
    rep = optimal_p_tail_estimate(0.5, 1.0, c=0.25, log_x_grid=[2.0 ** k for k in range(1, 11)])
    slope = gap_law_slope(rep)
    out.append(Check(s, "logarithmic_gap_slope", abs(slope - 1) <= 0.1, slope, 1.0))
    out.append(Check(s, "optimal_p_bound_dominates_tail", rep.bounds_hold))
    f = PowerLog(2.0)
    psi = IwaniecSbordonePsi(0.1, 0.5, 1.0)
    tb = tcheby_tail_bound(f, psi, [2.0, 10.0, 100.0, 1e4])
    out.append(Check(s, "tchebychev_bound_dominates_tail", tb.bounds_hold))
    return out


def suite_boyd() -> List[Check]:
    s = "boyd"
    out = []
    a, b = 0.25, 0.5
    est = boyd_indices(ConstantPsi(a, b), Indicator(((0.0, 1.0),), half_line()))
    out.append(Check(s, "lower_index_constant_psi", _rel(est.gamma1, 1 / b) <= 0.02, est.gamma1, 1 / b))
    out.append(Check(s, "upper_index_constant_psi", _rel(est.gamma2, 1 / a) <= 0.02, est.gamma2, 1 / a))
    return out


def suite_fixpoint() -> List[Check]:
    s = "fixpoint"
    out = []
    pr = scalar_scaling_problem()
    for mode in MODES:
        c = solve(pr, mode, reference=np.asarray(0.0))
        out.append(Check(s, f"scalar_certificate_sound:{mode}", c.sound))
        sl = c.decay_slope()
        out.append(Check(s, f"scalar_step_decay:{mode}", sl <= math.log(pr.alpha) + 1e-3, sl, math.log(pr.alpha)))
    pr2, h = sampled_sine_problem(n_pieces=32)
    for mode in MODES:
        c = solve(pr2, mode, reference=h)
        out.append(Check(s, f"sampled_certificate_sound:{mode}", c.sound))
    spot = spot_check_space(squared_distance_space(), [np.asarray(float(x)) for x in range(-5, 6)])
    out.append(Check(s, "squared_distance_constants", spot.holds, spot.quad_ratio, spot.K_quad))
    try:
        solve(ContractionProblem(squared_distance_space(), lambda x: 0.6 * x, 0.36, np.asarray(1.0)),
              TRIANGLE_SQUARED)
        refused = False
    except ConditionViolated:
        refused = True
    out.append(Check(s, "refuses_when_alpha_K2_at_least_one", refused))
    return out


def suite_transfer() -> List[Check]:
    s = "transfer"
    out = []
    psi = IwaniecSbordonePsi(0.2, 0.8, 1.0)
    corpus = [Indicator(((0.0, 1.0),), half_line()), Indicator(((0.5, 3.0),), half_line(), 2.0),
              Sampled((0.0, 1.0, 2.0, 5.0), (1.0, 3.0, 0.5, 0.0), half_line())]
    r = verify_transfer_norm(Identity(), constant_theta(psi.a, psi.b), psi, corpus)
    out.append(Check(s, "identity_ratio_one", abs(r.max_ratio - 1) <= 1e-6, r.max_ratio, 1.0))
    r = verify_transfer_norm(Dilation(2.0), dilation_theta(psi.a, psi.b, 2.0), psi, corpus)
    worst = max(abs(x - 1) for x in r.ratios)
    out.append(Check(s, "dilation_ratio_one", worst <= 1e-6, r.max_ratio, 1.0))
    try:
        verify_transfer_norm(Dilation(2.0), dilation_theta(psi.a, psi.b, 1.5), psi, corpus)
        flagged = False
    except BoundViolated:
        flagged = True
    out.append(Check(s, "undersized_theta_flagged", flagged))
    return out


def suite_collapse() -> List[Check]:
    s = "collapse"
    out = []
    psi = ConstantPsi(0.25, 0.5)
    ns = [2, 4, 8, 16, 32, 64]
    rep = collapse_demo(Indicator(((0.0, 1.0),)), psi, ns)
    out.append(Check(s, "piece_norm_bound", rep.bounds_hold))
    ratios = [rep.upper_bounds[i] / rep.upper_bounds[i + 1] for i in range(len(ns) - 1)]
    target = 2.0 ** (1 / psi.b - 1)
    dev = max(abs(r / target - 1) for r in ratios)
    out.append(Check(s, "doubling_ratio", dev <= 1e-9, dev, 1e-9))
    out.append(Check(s, "reconstruction", max(rep.reconstruction_errors) <= 1e-12, max(rep.reconstruction_errors), 1e-12))
    return out


SUITES: Dict[str, Callable[[], List[Check]]] = {
    "measure": suite_measure,
    "quasinorm": suite_quasinorm,
    "quasi-triangle": suite_quasi_triangle,
    "gls": suite_gls,
    "fundamental": suite_fundamental,
    "tails": suite_tails,
    "boyd": suite_boyd,
    "fixpoint": suite_fixpoint,
    "transfer": suite_transfer,
    "collapse": suite_collapse,
}


def run_suites(names: Optional[Sequence[str]] = None) -> List[Check]:
    names = list(SUITES) if not names else list(names)
    out: List[Check] = []
    for n in names:
        out.extend(SUITES[n]())
    return out
