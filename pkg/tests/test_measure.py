import math

import numpy as np
import pytest

from qgls import (BandaliyevPsi, ConstantPsi, Indicator, IwaniecSbordonePsi, MeasureSpace, PowerLog, Sampled,
                  SlowlyVarying, TabulatedPsi, TailDefined, evaluate, finite_discrete, half_line, psi_eval,
                  tail_model_psi, unit_interval)
from qgls.errors import DomainError, EvaluationUnsupported, PsiDomainError
from qgls.measure import add, dilate, restrict, to_sampled
from qgls.tails import AnalyticTail


class TestSpaces:
    def test_masses(self):
        assert unit_interval().total_mass == 1.0
        assert half_line().total_mass == math.inf
        assert finite_discrete((0.5, 0.25, 2.0)).total_mass == 2.75

    @pytest.mark.parametrize("w", [(), (1.0, 0.0), (1.0, -2.0), (math.inf,)])
    def test_bad_weights(self, w):
        with pytest.raises(DomainError):
            finite_discrete(w)

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            MeasureSpace("circle")


class TestEvaluate:
    def test_power(self):
        assert evaluate(PowerLog(2.0), 0.5) == pytest.approx(4.0, rel=1e-15)

    def test_indicator(self):
        ind = Indicator(((0.0, 0.25),))
        assert evaluate(ind, 0.1) == 1.0
        assert evaluate(ind, 0.3) == 0.0

    def test_sampled_left_closed(self):
        f = Sampled((0.25, 0.75), (3.0, 7.0))
        assert evaluate(f, 0.5) == 3.0
        assert evaluate(f, 0.75) == 7.0
        assert evaluate(f, 0.1) == 0.0

    def test_tail_defined_has_no_values(self):
        with pytest.raises(EvaluationUnsupported):
            evaluate(TailDefined(AnalyticTail(1.0, 0.5)), 0.5)

    @pytest.mark.parametrize("x", [0.0, 1.0, -0.2, 1.5])
    def test_outside_domain(self, x):
        with pytest.raises(DomainError):
            evaluate(PowerLog(2.0), x)

    def test_power_log_decreasing(self):
        x = np.linspace(0.01, 0.9, 200)
        v = evaluate(PowerLog(1.5), x)
        assert np.all(np.diff(v) < 0)


class TestValidation:
    @pytest.mark.parametrize("D,d", [(1.0, 0.0), (0.5, 0.0), (2.0, -1.0)])
    def test_power_log_params(self, D, d):
        with pytest.raises(DomainError):
            PowerLog(D, d)

    def test_sampled_grid(self):
        with pytest.raises(DomainError):
            Sampled((0.5,), (1.0,))
        with pytest.raises(DomainError):
            Sampled((0.5, 0.2), (1.0, 2.0))
        with pytest.raises(DomainError):
            Sampled((0.5, 1.2), (1.0, 2.0))

    def test_indicator_disjoint(self):
        with pytest.raises(DomainError):
            Indicator(((0.0, 0.5), (0.4, 0.6)))


class TestAlgebra:
    def test_add_exact(self):
        s = add(Indicator(((0.0, 0.5),)), Sampled((0.25, 0.75), (2.0, -1.0)))
        x = np.array([0.1, 0.3, 0.6, 0.8])
        assert list(evaluate(s, x)) == [1.0, 3.0, 2.0, -1.0]

    def test_restrict(self):
        r = restrict(Sampled((0.0, 0.5), (1.0, 2.0)), 0.25, 0.75)
        assert list(evaluate(r, np.array([0.1, 0.3, 0.6, 0.8]))) == [0.0, 1.0, 2.0, 0.0]

    def test_dilate_half_line_only(self):
        d = dilate(Indicator(((1.0, 2.0),), half_line()), 3.0)
        assert d.intervals == ((3.0, 6.0),)
        with pytest.raises(DomainError):
            dilate(Indicator(((0.0, 0.5),)), 2.0)

    def test_to_sampled_preserves_values(self):
        ind = Indicator(((0.1, 0.2), (0.5, 0.9)), height=3.0)
        x = np.linspace(0.01, 0.99, 97)
        assert np.array_equal(evaluate(ind, x), evaluate(to_sampled(ind), x))


class TestSlowlyVarying:
    @pytest.mark.parametrize("kappa", [-2.0, 0.5, 3.0])
    def test_slow_variation(self, kappa):
        L = SlowlyVarying("log_power", kappa)
        for t in (0.5, 2.0):
            gaps = [abs(L(t * y) / L(y) - 1) for y in (1e10, 1e100, 1e300)]
            assert gaps[0] > gaps[1] > gaps[2]
            assert gaps[2] < 0.01

    def test_positive(self):
        L = SlowlyVarying("log_power", -3.0)
        assert np.all(L(np.geomspace(1e-9, 1e9, 50)) > 0)


class TestPsi:
    def test_examples(self):
        assert psi_eval(IwaniecSbordonePsi(0.1, 0.5, 1.0), 0.25) == pytest.approx(256.0, rel=1e-14)
        assert psi_eval(ConstantPsi(0.1, 0.9, 1.0), 0.3) == 1.0
        assert psi_eval(BandaliyevPsi(1.0), 0.75) == pytest.approx(6.3496, abs=1e-4)

    @pytest.mark.parametrize("p", [0.1, 0.5, 0.05, 0.7])
    def test_open_interval(self, p):
        with pytest.raises(PsiDomainError):
            psi_eval(ConstantPsi(0.1, 0.5), p)

    def test_bandaliyev_interval(self):
        assert BandaliyevPsi(0.8).a == 0.4
        with pytest.raises(DomainError):
            BandaliyevPsi(0.8, 0.3)

    def test_tail_model_needs_b_below_one(self):
        with pytest.raises(DomainError):
            tail_model_psi(1.0)

    @pytest.mark.parametrize("psi", [
        ConstantPsi(0.2, 0.7, 3.0), IwaniecSbordonePsi(0.2, 0.7, 1.0), IwaniecSbordonePsi(0.05, 1.0, 2.0),
        BandaliyevPsi(0.8), tail_model_psi(0.6, 1.0), tail_model_psi(0.3, 0.0, SlowlyVarying("log_power", 2.0)),
        TabulatedPsi(0.1, 0.9, (0.2, 0.5, 0.8), (2.0, 0.5, 4.0)),
    ])
    def test_inf_psi_lower_bounds_grid(self, psi):
        eps = 1e-6 * (psi.b - psi.a)
        p = np.linspace(psi.a + eps, psi.b - eps, 1001)
        vals = psi(p)
        assert np.all(vals > 0)
        assert vals.min() >= psi.inf_psi * (1 - 1e-9)
        assert psi.inf_psi > 0

    def test_iwaniec_sbordone_not_monotone_for_small_b(self):
        # (b-p)^(-1/p) with b < 1 first decreases and then increases
        psi = IwaniecSbordonePsi(0.05, 0.5, 1.0)
        p = np.linspace(0.06, 0.49, 200)
        d = np.diff(psi(p))
        assert d[0] < 0 < d[-1]

    def test_unbounded_sup(self):
        assert IwaniecSbordonePsi(0.2, 0.7, 1.0).sup_psi == math.inf
        assert ConstantPsi(0.2, 0.7, 3.0).sup_psi == 3.0

    def test_tabulated_hits_nodes(self):
        psi = TabulatedPsi(0.1, 0.9, (0.2, 0.5, 0.8), (2.0, 0.5, 4.0))
        assert psi(np.array([0.2, 0.5, 0.8])) == pytest.approx([2.0, 0.5, 4.0], rel=1e-14)
