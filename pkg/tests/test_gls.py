import math

import numpy as np
import pytest

from qgls import (ConstantPsi, Indicator, IwaniecSbordonePsi, PowerLog, Sampled, TailDefined, boyd_indices,
                  collapse_demo, fundamental_bounds_check, fundamental_function, gls_norm, gls_quasi_triangle_check,
                  half_line, lp_quasinorm, natural_function, tail_model_psi)
from qgls.errors import DomainError, InsufficientDecay, NormDivergent
from qgls.optimize import golden_max, sup_open_interval
from qgls.tails import AnalyticTail


class TestSupSearch:
    def test_golden(self):
        x, fx = golden_max(lambda t: -(t - 0.3) ** 2, 0.0, 1.0, 1e-10)
        assert x == pytest.approx(0.3, abs=1e-8) and fx == pytest.approx(0.0, abs=1e-15)

    def test_interior(self):
        r = sup_open_interval(lambda p: -(p - 0.4) ** 2, 0.1, 0.9)
        assert r.endpoint is None and r.argmax == pytest.approx(0.4, abs=1e-6)

    def test_endpoint_limit(self):
        r = sup_open_interval(lambda p: p, 0.1, 0.9)
        assert r.endpoint == "b" and r.log_value == pytest.approx(0.9, abs=1e-12)

    def test_endpoint_divergence(self):
        r = sup_open_interval(lambda p: -math.log(0.9 - p), 0.1, 0.9)
        assert r.log_value == math.inf


class TestGlsNorm:
    def test_indicator_constant_psi(self):
        # sup_p m^(1/p) / c is reached as p -> b
        r = gls_norm(Indicator(((0.0, 0.3),)), ConstantPsi(0.2, 0.6, 2.0))
        assert r.value == pytest.approx(0.3 ** (1 / 0.6) / 2.0, rel=1e-9)
        assert r.endpoint_limit == "b"

    def test_power_against_iwaniec_sbordone(self):
        # ||x^-2||_p / (1/2 - p)^(-1/p) = 2^(-1/p), increasing to 1/4 at p = 1/2
        r = gls_norm(PowerLog(2.0), IwaniecSbordonePsi(0.1, 0.5, 1.0))
        assert r.value == pytest.approx(0.25, rel=1e-7)

    def test_interior_maximum(self):
        # theta = 2: ratio 2^(-1/p) (1/2 - p)^(1/p) peaks inside the window
        psi = IwaniecSbordonePsi(0.05, 0.5, 2.0)
        r = gls_norm(PowerLog(2.0), psi)
        p = np.linspace(0.051, 0.499, 20001)
        brute = np.max(2.0 ** (-1 / p) * (0.5 - p) ** (1 / p))
        assert r.endpoint_limit is None
        assert r.value == pytest.approx(brute, rel=1e-7)

    def test_divergent(self):
        assert gls_norm(PowerLog(2.0), ConstantPsi(0.1, 0.7)).value == math.inf

    def test_zero(self):
        assert gls_norm(Sampled((0.0, 0.5), (0.0, 0.0)), ConstantPsi(0.1, 0.7)).value == 0.0

    def test_tail_defined(self):
        f = TailDefined(AnalyticTail(1.0, 0.5))
        psi = ConstantPsi(0.1, 0.4)
        v = gls_norm(f, psi).value
        # closed form of the layer-cake integral: e^(p-b) b / (b - p), at p -> 0.4
        p, b = 0.4, 0.5
        assert v == pytest.approx((math.exp(p - b) * b / (b - p)) ** (1 / p), rel=1e-7)

    def test_profile_csv(self):
        r = gls_norm(Indicator(((0.0, 0.3),)), ConstantPsi(0.2, 0.6))
        lines = r.to_csv().splitlines()
        assert lines[0] == "p,norm,psi,ratio" and len(lines) == 1 + len(r.profile)


class TestNaturalFunction:
    def test_values_are_norms(self):
        f = PowerLog(2.0, 1.0)
        psi = natural_function(f, 0.1, 0.4, grid_size=9)
        for p, v in zip(psi.nodes, psi.values):
            assert v == pytest.approx(lp_quasinorm(f, p).value, rel=1e-12)

    def test_divergent_window(self):
        with pytest.raises(NormDivergent):
            natural_function(PowerLog(2.0), 0.1, 0.6)

    @pytest.mark.parametrize("f,a,b", [
        (PowerLog(2.0, 1.0), 0.05, 0.45),
        (Indicator(((0.2, 0.3),), height=5.0), 0.1, 1.0),
        (Sampled((0.0, 0.3, 0.6), (1.0, 10.0, 0.1)), 0.3, 0.7),
    ])
    def test_normalisation(self, f, a, b):
        assert gls_norm(f, natural_function(f, a, b)).value == pytest.approx(1.0, abs=1e-6)


class TestFundamental:
    def test_constant_psi(self):
        psi = ConstantPsi(0.25, 0.5)
        for d in (1e-6, 0.01, 0.5):
            assert fundamental_function(psi, d) == pytest.approx(d ** 2, rel=1e-9)
        assert fundamental_function(psi, 0.0) == 0.0

    def test_delta_range(self):
        with pytest.raises(DomainError):
            fundamental_function(ConstantPsi(0.25, 0.5), 1.5)

    def test_equals_indicator_norm(self):
        psi = IwaniecSbordonePsi(0.2, 0.7, 1.0)
        d = 0.3
        assert fundamental_function(psi, d) == pytest.approx(gls_norm(Indicator(((0.1, 0.4),)), psi).value, rel=1e-9)

    def test_bounds(self):
        for psi in (ConstantPsi(0.2, 0.7, 3.0), IwaniecSbordonePsi(0.2, 0.7), tail_model_psi(0.4, 2.0)):
            assert fundamental_bounds_check(psi, np.geomspace(1e-9, 1, 30)).all_hold


class TestQuasiTriangle:
    def test_constant(self):
        c = gls_quasi_triangle_check(Indicator(((0.0, 0.25),)), Indicator(((0.5, 0.75),)), ConstantPsi(0.5, 1.0))
        assert c.constant_claimed == 2.0 and c.holds


class TestBoyd:
    def test_constant_psi(self):
        est = boyd_indices(ConstantPsi(0.25, 0.5), Indicator(((0.0, 1.0),), half_line()))
        assert est.gamma1 == pytest.approx(2.0, rel=1e-3)
        assert est.gamma2 == pytest.approx(4.0, rel=1e-3)

    def test_probe_space(self):
        with pytest.raises(DomainError):
            boyd_indices(ConstantPsi(0.25, 0.5), Indicator(((0.0, 1.0),)))

    def test_curved_profile_rejected(self):
        # s = 2^(+-1..3) is far from the asymptotic regime for this psi
        with pytest.raises(InsufficientDecay):
            boyd_indices(IwaniecSbordonePsi(0.1, 1.0, 3.0), Indicator(((0.0, 1.0),), half_line()),
                         s_grid=[2.0 ** k for k in (-3, -2, -1, 1, 2, 3)], max_residual=1e-6)


class TestCollapse:
    def test_bounds_and_reconstruction(self):
        f = Sampled((0.0, 0.3, 0.8), (2.0, -1.0, 0.5))
        psi = ConstantPsi(0.3, 0.6)
        rep = collapse_demo(f, psi, [1, 2, 3, 8, 17])
        assert rep.bounds_hold
        assert max(rep.reconstruction_errors) < 1e-12

    def test_piece_norm_shrinks(self):
        psi = ConstantPsi(0.25, 0.5)
        rep = collapse_demo(Indicator(((0.0, 1.0),)), psi, [2, 4, 8, 16])
        # each piece is n * 1_{A}, mu(A) = 1/n: norm n^(1 - 1/b) exactly
        assert rep.max_piece_norms == pytest.approx([n ** (1 - 2.0) for n in (2, 4, 8, 16)], rel=1e-9)

    def test_refusals(self):
        with pytest.raises(DomainError):
            collapse_demo(PowerLog(2.0), ConstantPsi(0.1, 0.4), [2])
        with pytest.raises(DomainError):
            collapse_demo(Indicator(((0.0, 1.0),)), ConstantPsi(0.1, 1.0), [2])
        with pytest.raises(DomainError):
            collapse_demo(Indicator(((0.0, 1.0),), half_line()), ConstantPsi(0.1, 0.5), [2])
