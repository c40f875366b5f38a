import json
import math

import numpy as np
import pytest

from qgls import ConstantPsi, Indicator, IwaniecSbordonePsi, PowerLog, Sampled, half_line
from qgls.errors import BoundViolated, DomainError, DomainMismatch
from qgls.serialize import dumps
from qgls.transfer import (TABULATED, Dilation, Identity, Multiplication, OperatorBoundProfile, constant_theta,
                           dilation_theta, measured_theta, transfer_psi, verify_transfer_norm)


def test_identity_profile_keeps_psi():
    psi = IwaniecSbordonePsi(0.2, 0.8, 1.0)
    P = transfer_psi(constant_theta(0.2, 0.8), psi)
    p = np.linspace(0.25, 0.75, 11)
    assert np.allclose(P(p), psi(p), rtol=1e-15)
    assert P.inf_psi == pytest.approx(psi.inf_psi)


def test_dilation_profile():
    P = transfer_psi(dilation_theta(0.2, 0.8, 2.0), ConstantPsi(0.2, 0.8))
    p = np.linspace(0.25, 0.75, 11)
    assert np.allclose(P(p), 2.0 ** (1 / p), rtol=1e-14)


def test_domain_mismatch():
    with pytest.raises(DomainMismatch):
        transfer_psi(constant_theta(0.2, 0.7), ConstantPsi(0.2, 0.8))


def test_invalid_profiles():
    with pytest.raises(DomainError):
        constant_theta(0.2, 0.8, 0.0)
    with pytest.raises(DomainError):
        OperatorBoundProfile(TABULATED, 0.2, 0.8, nodes=(0.3,), values=(1.0,))


def test_multiplication_never_increases():
    w = Sampled((0.0, 0.5), (0.5, -1.0))
    corpus = [Sampled((0.0, 0.3, 0.6), (1.0, 4.0, 2.0)), Indicator(((0.2, 0.7),), height=3.0)]
    r = verify_transfer_norm(Multiplication(w), constant_theta(0.3, 0.9), ConstantPsi(0.3, 0.9), corpus)
    assert r.max_ratio <= 1 + 1e-12


def test_dilation_sharp_on_half_line():
    corpus = [Indicator(((0.0, 1.0),), half_line()), Sampled((0.0, 2.0, 3.0), (1.0, -2.0, 0.0), half_line())]
    psi = IwaniecSbordonePsi(0.2, 0.8, 1.0)
    for s in (0.1, 2.0, 7.5):
        r = verify_transfer_norm(Dilation(s), dilation_theta(0.2, 0.8, s), psi, corpus)
        assert r.ratios == pytest.approx([1.0, 1.0], abs=1e-6)


def test_undersized_theta():
    corpus = [Indicator(((0.0, 1.0),), half_line())]
    with pytest.raises(BoundViolated) as exc:
        verify_transfer_norm(Dilation(2.0), constant_theta(0.2, 0.8), ConstantPsi(0.2, 0.8), corpus)
    assert exc.value.function_index == 0 and exc.value.ratio > 1


def test_measured_theta_is_empirical():
    corpus = [Sampled((0.0, 0.3, 0.6), (1.0, 4.0, 2.0)), PowerLog(1.5)]
    w = Sampled((0.0, 0.5), (0.5, 1.0))
    th = measured_theta(Multiplication(w), corpus[:1], 0.2, 0.6)
    assert th.theta_kind == "empirical"
    assert all(v <= 1 + 1e-12 for v in th.values)
    r = verify_transfer_norm(Multiplication(w), th, ConstantPsi(0.2, 0.6), corpus[:1])
    assert r.theta_kind == "empirical" and r.max_ratio <= 1 + 1e-6


def test_report_json():
    corpus = [Indicator(((0.0, 0.4),))]
    r = verify_transfer_norm(Identity(), constant_theta(0.2, 0.8), ConstantPsi(0.2, 0.8), corpus)
    doc = json.loads(dumps(r.to_dict()))
    assert doc == {"operator_tag": "identity", "max_ratio": 1.0, "per_function": [{"id": 0, "ratio": 1.0}],
                   "theta_kind": "constant"}
