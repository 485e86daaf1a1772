import math

import numpy as np
import pytest

from dnlkg.errors import InvalidParameterError
from dnlkg.grid import Grid1D, h1_norm_sq, l2_inner, l2_norm_sq
from dnlkg.ground_state import eval_Q_prime
from dnlkg.spectrum import (
    assemble_L,
    coercivity_probe,
    eigenvalues_low,
    kernel_direction,
    rate_constants,
    smallest_eigenpair,
)
from tests.conftest import random_smooth_field


@pytest.fixture(scope="module")
def op_small():
    grid = Grid1D(40.0, 4097)
    return assemble_L(3.0, grid)


def test_kernel_direction_residual_second_order():
    res = []
    for n in (2049, 4097):
        grid = Grid1D(40.0, n)
        op = assemble_L(3.0, grid)
        qp = kernel_direction(3.0, grid)
        res.append(np.max(np.abs(op.apply(qp))))
    assert res[1] < 1e-3
    assert res[0] / res[1] == pytest.approx(4.0, rel=0.2)


def test_action_on_constant_in_tails(op_small):
    grid = op_small.grid
    ones = np.ones(grid.n)
    image = op_small.apply(ones)
    far = (np.abs(grid.x) > 20) & (np.abs(grid.x) < 35)
    assert np.max(np.abs(image[far] - 1.0)) < 1e-12


def test_operator_symmetric(op_small, rng):
    grid = op_small.grid
    u = random_smooth_field(rng, grid.x)
    v = random_smooth_field(rng, grid.x)
    lhs = l2_inner(grid, op_small.apply(u), v)
    rhs = l2_inner(grid, u, op_small.apply(v))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_unstable_eigenvalue_poschl_teller(spectral_p3):
    # for p=3 the potential is the classic -6 sech^2 well: bottom eigenvalue
    # 1 - 4 = -3 with eigenfunction proportional to sech^2
    assert spectral_p3.nu0_sq == pytest.approx(3.0, abs=1e-3)
    grid = spectral_p3.grid
    sech2 = 1.0 / np.cosh(grid.x) ** 2
    sech2 /= math.sqrt(l2_norm_sq(grid, sech2))
    overlap = abs(l2_inner(grid, spectral_p3.Y, sech2))
    assert overlap == pytest.approx(1.0, abs=1e-6)


def test_eigenvalue_second_order_convergence():
    errs = []
    for n in (2049, 4097):
        lam, _ = smallest_eigenpair(assemble_L(3.0, Grid1D(40.0, n)))
        errs.append(abs(lam + 3.0))
    assert errs[0] / errs[1] == pytest.approx(4.0, abs=0.5)


def test_eigenvector_even_and_decaying(spectral_p3):
    y = spectral_p3.Y
    assert np.max(np.abs(y - y[::-1])) <= 1e-6
    grid = spectral_p3.grid
    for x0 in (15.0, -15.0):
        i = int(np.argmin(np.abs(grid.x - x0)))
        assert abs(y[i]) <= 10.0 * math.exp(-2.0 * abs(x0))


def test_spectral_gap_structure(op_small):
    vals = eigenvalues_low(op_small, 3)
    assert vals[0] == pytest.approx(-3.0, abs=1e-3)
    assert abs(vals[1]) <= 1e-3
    assert vals[2] >= 0.9


def test_rate_constants_reference():
    rates = rate_constants(1.0, math.sqrt(3.0))
    assert rates.nu_plus == pytest.approx(1.0, rel=1e-14)
    assert rates.nu_minus == pytest.approx(-3.0, rel=1e-14)
    assert rates.zeta_plus == pytest.approx(3.0, rel=1e-14)
    assert rates.zeta_minus == pytest.approx(-1.0, rel=1e-14)
    assert rates.beta == pytest.approx(0.25, rel=1e-14)


def test_rate_constants_identities(rng):
    for _ in range(25):
        alpha = rng.uniform(0.1, 3.0)
        nu0 = rng.uniform(0.1, 3.0)
        r = rate_constants(alpha, nu0)
        assert r.nu_plus * r.nu_minus == pytest.approx(-(nu0**2), rel=1e-12)
        assert r.beta * (r.zeta_plus - r.zeta_minus) == pytest.approx(1.0, rel=1e-14)
        assert r.nu_plus > 0 > r.nu_minus
        assert r.zeta_plus > 0 > r.zeta_minus


def test_pairing_of_mode_vectors(spectral_p3):
    # <Y+, Z+> = zeta+ + nu+ = 1/beta for the L2-normalized eigenfunction
    g = spectral_p3.grid
    norm_sq = l2_norm_sq(g, spectral_p3.Y)
    pairing = (spectral_p3.zeta_plus + spectral_p3.nu_plus) * norm_sq
    assert pairing == pytest.approx(1.0 / spectral_p3.beta, rel=1e-12)


def test_invalid_rate_inputs():
    with pytest.raises(InvalidParameterError):
        rate_constants(0.0, 1.0)
    with pytest.raises(InvalidParameterError):
        rate_constants(1.0, -1.0)


def test_coercivity_on_eigenfunction(spectral_p3):
    grid = spectral_p3.grid
    op = assemble_L(3.0, grid)
    quad, _, _ = coercivity_probe(op, spectral_p3.Y, spectral_p3.Y, kernel_direction(3.0, grid))
    assert quad == pytest.approx(-3.0, abs=1e-3)


def test_coercivity_on_kernel(op_small):
    grid = op_small.grid
    qp = kernel_direction(3.0, grid)
    quad, _, _ = coercivity_probe(op_small, qp, qp, qp)
    assert abs(quad) <= 50.0 * grid.dx**2


def test_coercivity_positive_on_projected_ensemble(spectral_p3, rng):
    grid = Grid1D(40.0, 2049)
    op = assemble_L(3.0, grid)
    from scipy.interpolate import CubicSpline

    y = CubicSpline(spectral_p3.grid.x, spectral_p3.Y)(grid.x)
    y /= math.sqrt(l2_norm_sq(grid, y))
    qp = kernel_direction(3.0, grid)
    qp_hat = qp / math.sqrt(l2_norm_sq(grid, qp))
    ratios = []
    for _ in range(200):
        eps = random_smooth_field(rng, grid.x)
        eps = eps - l2_inner(grid, eps, y) * y - l2_inner(grid, eps, qp_hat) * qp_hat
        quad, proj_y, proj_qp = coercivity_probe(op, eps, y, qp)
        assert abs(proj_y) < 1e-10 and abs(proj_qp) < 1e-9
        ratios.append(quad / h1_norm_sq(grid, eps))
    empirical_c = min(ratios)
    assert empirical_c > 0.0
