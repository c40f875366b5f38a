import math

import numpy as np
import pytest
from scipy.special import gammaln

from qgls import (Indicator, PowerLog, Sampled, SlowlyVarying, aoki_rolewicz_power, geometric_mean_limit,
                  half_line, lp_quasinorm, quasi_triangle_check, quasi_triangle_constant)
from qgls.errors import DivergentLogIntegral, DomainError, EvaluationUnsupported, QuadratureNoConvergence
from qgls.gls import natural_function_asymptote
from qgls.measure import TailDefined, finite_discrete
from qgls.quadrature import integrate, integrate_to_infinity
from qgls.quasinorm import double_inequality
from qgls.tails import AnalyticTail


class TestQuadrature:
    def test_smooth(self):
        v, err = integrate(np.cos, 0.0, math.pi / 2, rel_tol=1e-13)
        assert v == pytest.approx(1.0, rel=1e-13)
        assert err <= 1e-13

    def test_endpoint_singularity(self):
        v, _ = integrate(lambda x: x ** -0.5, 0.0, 1.0, rel_tol=1e-10)
        assert v == pytest.approx(2.0, rel=1e-9)

    def test_semi_infinite(self):
        v, _, div = integrate_to_infinity(lambda x: np.exp(-x), 0.0, rel_tol=1e-12)
        assert not div and v == pytest.approx(1.0, rel=1e-12)

    def test_divergence_detected(self):
        _, _, div = integrate_to_infinity(lambda x: np.ones_like(x), 0.0)
        assert div

    def test_non_finite(self):
        with pytest.raises(QuadratureNoConvergence):
            integrate(lambda x: np.full_like(x, np.nan), 0.0, 1.0)


class TestLp:
    def test_power_closed_form(self):
        r = lp_quasinorm(PowerLog(2.0), 0.25)
        assert r.value == pytest.approx(16.0, rel=1e-12)
        assert r.converged and r.abs_error_estimate <= 1e-9 * r.value

    @pytest.mark.parametrize("p", [0.5, 0.6, 1.0])
    def test_divergent(self, p):
        r = lp_quasinorm(PowerLog(2.0), p)
        assert r.value == math.inf and r.converged

    def test_indicator(self):
        assert lp_quasinorm(Indicator(((0.0, 0.5),)), 0.5).value == pytest.approx(0.25, rel=1e-15)

    def test_sampled_exact(self):
        f = Sampled((0.0, 0.2, 0.5), (3.0, -1.0, 2.0))
        p = 0.3
        exact = (0.2 * 3 ** p + 0.3 * 1 + 0.5 * 2 ** p) ** (1 / p)
        assert lp_quasinorm(f, p).value == pytest.approx(exact, rel=1e-14)

    def test_finite_discrete(self):
        f = Sampled((0, 2), (2.0, 5.0), finite_discrete((0.5, 1.0, 0.25)))
        p = 0.5
        assert lp_quasinorm(f, p).value == pytest.approx((0.5 * 2 ** p + 0.25 * 5 ** p) ** 2, rel=1e-14)

    def test_half_line_infinite_piece(self):
        assert lp_quasinorm(Sampled((0.0, 1.0), (1.0, 1.0), half_line()), 0.5).value == math.inf
        assert lp_quasinorm(Sampled((0.0, 1.0), (1.0, 0.0), half_line()), 0.5).value == 1.0

    def test_power_log_gamma_form(self):
        # ||x^-D |ln x|^d||_p^p = Gamma(p d + 1) / (1 - p D)^(p d + 1)
        for D, d, p in [(2.0, 1.0, 0.3), (1.5, 2.5, 0.4), (3.0, 0.5, 0.1)]:
            r = 1 - p * D
            exact = math.exp((gammaln(p * d + 1) - (p * d + 1) * math.log(r)) / p)
            assert lp_quasinorm(PowerLog(D, d), p).value == pytest.approx(exact, rel=1e-10)

    def test_scale_homogeneous(self):
        f = PowerLog(1.5, 0.5, SlowlyVarying("log_power", 1.0))
        g = PowerLog(1.5, 0.5, SlowlyVarying("log_power", 1.0), scale=-3.0)
        assert lp_quasinorm(g, 0.4).value == pytest.approx(3.0 * lp_quasinorm(f, 0.4).value, rel=1e-12)

    @pytest.mark.parametrize("p", [0.0, -0.1, 1.01])
    def test_bad_p(self, p):
        with pytest.raises(DomainError):
            lp_quasinorm(PowerLog(2.0), p)

    def test_tail_defined_refused(self):
        with pytest.raises(EvaluationUnsupported):
            lp_quasinorm(TailDefined(AnalyticTail(1.0, 0.5)), 0.3)

    def test_asymptote_exact_for_unit_L(self):
        f = PowerLog(2.0, 1.0)
        for p in (0.45, 0.49, 0.499):
            assert natural_function_asymptote(f, p) == pytest.approx(lp_quasinorm(f, p).value, rel=1e-9)

    def test_asymptote_ratio_tends_to_one(self):
        f = PowerLog(2.0, 1.0, SlowlyVarying("log_power", 1.5))
        ratios = [lp_quasinorm(f, p).value / natural_function_asymptote(f, p) for p in (0.49, 0.4999, 0.499999)]
        gaps = [abs(r - 1) for r in ratios]
        assert gaps[0] > gaps[1] > gaps[2]


class TestGeometricMean:
    def test_power(self):
        assert geometric_mean_limit(PowerLog(2.0)) == pytest.approx(math.e ** 2, rel=1e-10)

    def test_power_log(self):
        assert geometric_mean_limit(PowerLog(2.0, 1.0)) == pytest.approx(math.exp(2 - np.euler_gamma), rel=1e-10)

    def test_sampled(self):
        f = Sampled((0.0, 0.5), (2.0, 8.0))
        assert geometric_mean_limit(f) == pytest.approx(4.0, rel=1e-15)

    def test_vanishing(self):
        with pytest.raises(DivergentLogIntegral):
            geometric_mean_limit(Sampled((0.0, 0.5), (2.0, 0.0)))
        with pytest.raises(DivergentLogIntegral):
            geometric_mean_limit(Indicator(((0.0, 0.5),)))


class TestAlgebra:
    def test_constants(self):
        assert quasi_triangle_constant(0.5) == 2.0
        assert quasi_triangle_constant(1.0) == 1.0
        assert aoki_rolewicz_power(2.0) == pytest.approx(0.5)
        assert aoki_rolewicz_power(1.0) == 1.0
        with pytest.raises(DomainError):
            aoki_rolewicz_power(0.5)

    def test_saturation(self):
        # two disjoint sets of measure 1/4 at p = 1/2: ratio equals the constant 2
        c = quasi_triangle_check(Indicator(((0.0, 0.25),)), Indicator(((0.5, 0.75),)), 0.5)
        assert c.worst_ratio_observed == pytest.approx(2.0, rel=1e-14)
        assert c.holds and c.p_norm_holds

    def test_double_inequality(self):
        lo, mid, hi = double_inequality(1.0, 1.0, 0.5)
        assert (float(lo), float(mid), float(hi)) == pytest.approx((math.sqrt(2), 2.0, 2.0))
