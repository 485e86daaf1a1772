import math

import numpy as np
import pytest

from dnlkg.errors import InvalidParameterError
from dnlkg.grid import Grid1D
from dnlkg.ground_state import (
    GroundStateConsts,
    ModelParams,
    QuadratureConfig,
    compute_constants,
    eval_Q,
    eval_Q_prime,
    residual_Q,
    tail_amplitude,
)


def test_profile_at_origin():
    assert eval_Q(3.0, 0.0) == pytest.approx(math.sqrt(2.0), abs=1e-14)


def test_profile_even():
    xs = np.linspace(0.1, 12.0, 37)
    assert np.allclose(eval_Q(3.0, xs), eval_Q(3.0, -xs), rtol=0, atol=0)


def test_profile_positive():
    xs = np.linspace(-30, 30, 301)
    assert np.all(eval_Q(2.7, xs) > 0)


def test_tail_amplitude_matches_closed_form():
    assert tail_amplitude(3.0) == pytest.approx(2.0 * math.sqrt(2.0), rel=1e-15)


@pytest.mark.parametrize("p", [3.0, 2.5, 4.0])
def test_profile_tail(p):
    # remainder of Q - c_Q e^{-x} is O(e^{-min(p,3) x}), far below 1e-7 relative at x=10
    x = 10.0
    tail = tail_amplitude(p) * math.exp(-x)
    assert eval_Q(p, x) == pytest.approx(tail, rel=1e-7)


def test_derivative_at_origin_and_odd():
    assert eval_Q_prime(3.0, 0.0) == 0.0
    xs = np.linspace(0.2, 8.0, 23)
    assert np.allclose(eval_Q_prime(3.0, xs), -eval_Q_prime(3.0, -xs), rtol=0, atol=0)


def test_derivative_tail():
    x = 10.0
    assert eval_Q_prime(3.0, x) == pytest.approx(-tail_amplitude(3.0) * math.exp(-x), rel=1e-7)


def test_derivative_by_finite_differences():
    xs = np.linspace(-5.0, 5.0, 101)
    errs = []
    for h in (1e-3, 5e-4):
        fd = (eval_Q(3.0, xs + h) - eval_Q(3.0, xs - h)) / (2 * h)
        errs.append(np.max(np.abs(fd - eval_Q_prime(3.0, xs))))
    assert errs[0] < 1e-5
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


@pytest.mark.parametrize("p", [3.0, 2.5])
def test_profile_equation_residual_second_order(p):
    coarse = residual_Q(p, Grid1D(20.0, int(round(40 / 0.01)) + 1))
    fine = residual_Q(p, Grid1D(20.0, int(round(40 / 0.005)) + 1))
    assert coarse <= 1e-3
    assert coarse / fine == pytest.approx(4.0, rel=0.15)


def test_constants_reference_values():
    consts = compute_constants(ModelParams(alpha=1.0, p=3.0))
    # closed forms for p=3 (profile sqrt(2) sech): c1 = E_Q = 4/3, kappa = 12
    assert consts.c_Q == pytest.approx(2.0 * math.sqrt(2.0), rel=1e-14)
    assert consts.c_1 == pytest.approx(4.0 / 3.0, abs=1e-8)
    assert consts.kappa == pytest.approx(12.0, abs=1e-6)
    assert consts.E_Q == pytest.approx(4.0 / 3.0, abs=1e-8)


def test_constants_insensitive_to_truncation():
    a = compute_constants(ModelParams(1.0, 3.0), QuadratureConfig(half_width=30.0, dx=0.005))
    b = compute_constants(ModelParams(1.0, 3.0), QuadratureConfig(half_width=60.0, dx=0.005))
    for name in ("c_1", "kappa", "E_Q"):
        assert getattr(a, name) == pytest.approx(getattr(b, name), abs=1e-10)


def test_interaction_constant_symmetric_weight():
    # exchanging e^{-x} for e^{+x} in the interaction integral leaves kappa
    # unchanged (even profile)
    p = 3.0
    h, w = 0.005, 40.0
    x = np.linspace(-w, w, int(round(2 * w / h)) + 1)
    q = eval_Q(p, x)

    def trapz(f):
        return h * (f.sum() - 0.5 * (f[0] + f[-1]))

    assert trapz(q**p * np.exp(-x)) == pytest.approx(trapz(q**p * np.exp(x)), rel=1e-12)


@pytest.mark.parametrize("alpha,p", [(0.0, 3.0), (-1.0, 3.0), (1.0, 2.0), (1.0, 1.5)])
def test_invalid_model_params(alpha, p):
    with pytest.raises(InvalidParameterError):
        ModelParams(alpha=alpha, p=p)


def test_invalid_profile_power():
    with pytest.raises(InvalidParameterError):
        eval_Q(2.0, 0.0)
    with pytest.raises(InvalidParameterError):
        eval_Q_prime(1.5, 0.0)


def test_invalid_quadrature_config():
    with pytest.raises(InvalidParameterError):
        QuadratureConfig(half_width=10.0)
    with pytest.raises(InvalidParameterError):
        QuadratureConfig(dx=0.1)


def test_consts_must_be_positive():
    with pytest.raises(InvalidParameterError):
        GroundStateConsts(c_Q=1.0, c_1=-1.0, kappa=1.0, E_Q=1.0)
