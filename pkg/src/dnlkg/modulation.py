"""Decomposition of a field near a multi-soliton and its diagnostics.

A state close to a sum of K signed solitons is written as that sum plus
a residual pair constrained to be orthogonal to the translation modes.
The centers come from a damped Newton iteration with an analytic
Jacobian (cross terms included), the velocity parameters from a Gram
system, and the residual carries projections on the exponential modes
of each soliton.  The diagnostics bundle the scalar functionals used to
monitor a tracked trajectory: the residual-plus-velocities norm, the
same-sign and opposite-sign interaction sums, the squared unstable
amplitudes and a damped energy functional.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IllConditionedError, InvalidParameterError, OutOfTubeError
from .grid import Grid1D, energy_norm_sq, grad_norm_sq, l2_inner, l2_norm_sq, trapezoid
from .ground_state import GroundStateConsts, eval_Q, eval_Q_prime, eval_Q_second
from .solver import FieldState, energy, nonlinearity, nonlinearity_potential
from .spectrum import SpectralData

NEWTON_TOL = 1e-12
MIN_SPACING = 2.0
TUBE_RADIUS = 0.3


def soliton_sum(x: np.ndarray, sigma: np.ndarray, z: np.ndarray, p: float) -> np.ndarray:
    """Sum of signed soliton profiles at the given centers."""
    out = np.zeros_like(x)
    for s, zk in zip(sigma, z):
        out += s * eval_Q(p, x - zk)
    return out


def translation_modes(x: np.ndarray, sigma: np.ndarray, z: np.ndarray, p: float) -> np.ndarray:
    """Rows are the signed translation modes d/dx of each soliton."""
    return np.stack([s * eval_Q_prime(p, x - zk) for s, zk in zip(sigma, z)])


@dataclass(frozen=True)
class Decomposition:
    """Soliton parameters, residual pair and exponential-mode amplitudes."""

    p: float
    alpha: float
    K: int
    sigma: np.ndarray
    z: np.ndarray
    ell: np.ndarray
    eps_u: np.ndarray
    eps_v: np.ndarray
    a_plus: np.ndarray
    a_minus: np.ndarray
    grid: Grid1D
    nu_minus: float
    newton_iters: int
    ortho_residual: float

    @property
    def eps_norm(self) -> float:
        return float(np.sqrt(energy_norm_sq(self.grid, self.eps_u, self.eps_v)))

    def as_dict(self) -> dict:
        return {
            "K": self.K,
            "sigma": self.sigma.tolist(),
            "z": self.z.tolist(),
            "ell": self.ell.tolist(),
            "a_plus": self.a_plus.tolist(),
            "a_minus": self.a_minus.tolist(),
            "eps_norm": self.eps_norm,
            "newton_iters": self.newton_iters,
            "ortho_residual": self.ortho_residual,
        }


def _validate_signs(sigma, K):
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (K,) or not np.all(np.abs(sigma) == 1.0):
        raise InvalidParameterError("signs must be a length-K vector of +-1")
    return sigma


def decompose(
    state: FieldState,
    K: int,
    sigma,
    z_guess,
    spectral: SpectralData,
    *,
    max_iter: int = 50,
    tube_radius: float = TUBE_RADIUS,
    min_spacing: float = MIN_SPACING,
) -> Decomposition:
    """Fit centers and velocities so the residual is orthogonal to the
    translation modes, then project the residual on the exponential modes.

    Raises OutOfTubeError when Newton fails to converge in max_iter steps
    or the converged residual exceeds the tube radius, and
    IllConditionedError when centers come closer than min_spacing.
    """
    p, alpha = spectral.p, spectral.alpha
    grid = state.grid
    x = grid.x
    u, v = state.u, state.v
    sigma = _validate_signs(sigma, K)
    z = np.array(z_guess, dtype=float)
    if z.shape != (K,):
        raise InvalidParameterError("z_guess must have length K")
    if K > 1 and not np.all(np.diff(z) > 0):
        raise InvalidParameterError("z_guess must be strictly increasing")

    def residual(zc):
        modes = translation_modes(x, sigma, zc, p)
        eps = u - soliton_sum(x, sigma, zc, p)
        return np.array([l2_inner(grid, eps, m) for m in modes]), modes, eps

    g, modes, eps = residual(z)
    gnorm = float(np.max(np.abs(g)))
    iters = 0
    while gnorm > NEWTON_TOL and iters < max_iter:
        if K > 1 and np.min(np.diff(z)) < min_spacing:
            raise IllConditionedError(
                f"soliton spacing fell below {min_spacing} during the center fit"
            )
        jac = np.empty((K, K))
        for k in range(K):
            curvature = sigma[k] * eval_Q_second(p, x - z[k])
            for m in range(K):
                jac[k, m] = l2_inner(grid, modes[m], modes[k])
            jac[k, k] -= l2_inner(grid, eps, curvature)
        try:
            delta = np.linalg.solve(jac, -g)
        except np.linalg.LinAlgError as exc:
            raise IllConditionedError(f"singular center Jacobian: {exc}") from exc

        # step halving: keep the orthogonality residual decreasing
        scale = 1.0
        for _ in range(12):
            g_new, modes_new, eps_new = residual(z + scale * delta)
            if float(np.max(np.abs(g_new))) < gnorm:
                break
            scale *= 0.5
        z = z + scale * delta
        g, modes, eps = g_new, modes_new, eps_new
        gnorm = float(np.max(np.abs(g_new)))
        iters += 1

    if gnorm > NEWTON_TOL:
        raise OutOfTubeError(
            f"center fit did not converge in {max_iter} iterations "
            f"(residual {gnorm:.3e})",
            t=state.t,
        )
    if K > 1 and np.min(np.diff(z)) < min_spacing:
        raise IllConditionedError(f"converged spacing below {min_spacing}")

    gram = np.array([[l2_inner(grid, modes[m], modes[k]) for m in range(K)] for k in range(K)])
    rhs = np.array([-l2_inner(grid, v, modes[k]) for k in range(K)])
    ell = np.linalg.solve(gram, rhs)

    eps_u = u - soliton_sum(x, sigma, z, p)
    eps_v = v + modes.T @ ell

    y_shift = np.stack([s * spectral.y_at(x - zk) for s, zk in zip(sigma, z)])
    a_plus = np.array(
        [
            spectral.zeta_plus * l2_inner(grid, eps_u, yk) + l2_inner(grid, eps_v, yk)
            for yk in y_shift
        ]
    )
    a_minus = np.array(
        [
            spectral.zeta_minus * l2_inner(grid, eps_u, yk) + l2_inner(grid, eps_v, yk)
            for yk in y_shift
        ]
    )

    dec = Decomposition(
        p=p,
        alpha=alpha,
        K=K,
        sigma=sigma,
        z=z,
        ell=ell,
        eps_u=eps_u,
        eps_v=eps_v,
        a_plus=a_plus,
        a_minus=a_minus,
        grid=grid,
        nu_minus=spectral.nu_minus,
        newton_iters=iters,
        ortho_residual=gnorm,
    )
    if dec.eps_norm > tube_radius:
        raise OutOfTubeError(
            f"residual norm {dec.eps_norm:.3f} exceeds the tube radius {tube_radius}",
            t=state.t,
        )
    return dec


def default_mu(dec: Decomposition) -> float:
    return 0.9 * min(1.0, dec.alpha, abs(dec.nu_minus))


@dataclass(frozen=True)
class Diagnostics:
    """Scalar functionals of one decomposition."""

    N: float
    F_plus: float
    F_minus: float
    b: float
    calE: float
    calB: float
    mu: float
    y: np.ndarray
    r: np.ndarray

    def as_dict(self) -> dict:
        return {
            "N": self.N,
            "F_plus": self.F_plus,
            "F_minus": self.F_minus,
            "b": self.b,
            "calE": self.calE,
            "calB": self.calB,
            "mu": self.mu,
            "y": self.y.tolist(),
            "r": self.r.tolist(),
        }


def interaction_sums(dec: Decomposition) -> tuple[float, float, np.ndarray, np.ndarray]:
    """Same-sign and opposite-sign neighbor sums of exp(-gap).

    Gaps are measured between damping-adjusted centers y = z + ell/(2 alpha).
    """
    y = dec.z + dec.ell / (2.0 * dec.alpha)
    r = np.diff(y)
    f_plus = 0.0
    f_minus = 0.0
    for k in range(dec.K - 1):
        term = float(np.exp(-r[k]))
        if dec.sigma[k] == dec.sigma[k + 1]:
            f_plus += term
        else:
            f_minus += term
    return f_plus, f_minus, y, r


def diagnostics(dec: Decomposition, mu: float | None = None) -> Diagnostics:
    """All scalar monitors of a decomposition.

    mu must lie in (0, min(1, alpha, |nu_minus|)]; the default is 0.9
    times that ceiling.
    """
    if mu is None:
        mu = default_mu(dec)
    ceiling = min(1.0, dec.alpha, abs(dec.nu_minus))
    if not 0 < mu <= ceiling:
        raise InvalidParameterError(f"mu must lie in (0, {ceiling:.6g}], got {mu}")

    grid = dec.grid
    n_sq = energy_norm_sq(grid, dec.eps_u, dec.eps_v) + float(np.dot(dec.ell, dec.ell))
    f_plus, f_minus, y, r = interaction_sums(dec)
    b = float(np.dot(dec.a_plus, dec.a_plus))
    cal_b = float(np.dot(dec.ell, dec.ell)) + float(np.dot(dec.a_minus, dec.a_minus)) / (2.0 * mu)

    rho = 2.0 * dec.alpha - mu
    template = soliton_sum(grid.x, dec.sigma, dec.z, dec.p)
    shifted = template + dec.eps_u
    nonlinear_part = (
        nonlinearity_potential(shifted, dec.p)
        - nonlinearity_potential(template, dec.p)
        - nonlinearity(template, dec.p) * dec.eps_u
    )
    cal_e = (
        grad_norm_sq(grid, dec.eps_u)
        + (1.0 - rho * mu) * l2_norm_sq(grid, dec.eps_u)
        + l2_norm_sq(grid, dec.eps_v + mu * dec.eps_u)
        - 2.0 * trapezoid(grid, nonlinear_part)
    )
    return Diagnostics(
        N=float(np.sqrt(n_sq)),
        F_plus=f_plus,
        F_minus=f_minus,
        b=b,
        calE=cal_e,
        calB=cal_b,
        mu=mu,
        y=y,
        r=r,
    )


def energy_expansion_check(
    state: FieldState, dec: Decomposition, consts: GroundStateConsts
) -> float:
    """Defect of the two-term energy expansion around the soliton sum.

    Returns |E(state) - (K E_Q - c1 kappa F_plus + c1 kappa F_minus)|,
    which is second order in the residual and superlinear in the
    interaction sums.
    """
    f_plus, f_minus, _, _ = interaction_sums(dec)
    predicted = dec.K * consts.E_Q - consts.c_1 * consts.kappa * f_plus + consts.c_1 * consts.kappa * f_minus
    return abs(energy(state, dec.p) - predicted)
