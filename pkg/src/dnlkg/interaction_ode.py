"""Center dynamics of interacting solitary waves.

The soliton centers of an alternating-sign configuration obey a nearest-
neighbor system with exponentially decaying coupling, whose exact
solution separates the centers like log t.  This module provides that
exact profile, an adaptive integrator for the system (run in logarithmic
time so accuracy is uniform over decades), and the recentred system for
the deviations from the profile together with its linearization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import InvalidParameterError, NumericalFailureError


@dataclass(frozen=True)
class OdeState:
    """Centers y (strictly increasing) at time t > 0."""

    t: float
    y: np.ndarray

    def __post_init__(self):
        if not self.t > 0:
            raise InvalidParameterError("time must be positive")
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "y", y)
        if y.ndim != 1 or y.size < 2:
            raise InvalidParameterError("need at least two centers")
        if not np.all(np.diff(y) > 0):
            raise InvalidParameterError("centers must be strictly increasing")


@dataclass(frozen=True)
class AsymptoticProfile:
    """Offsets tau_k of the exact log-separating solution.

    Satisfies sum(tau) = 0 and exp(-(tau_{k+1}-tau_k)) = (2 alpha/kappa) gamma_k
    with gamma_k = k (K-k)/2.
    """

    K: int
    tau: np.ndarray
    gamma: np.ndarray
    alpha: float
    kappa: float


def interaction_gammas(K: int) -> np.ndarray:
    k = np.arange(1, K)
    return k * (K - k) / 2.0


def tau_profile(K: int, alpha: float, kappa: float) -> AsymptoticProfile:
    """Offsets solving the exact-profile compatibility relations."""
    if K < 2:
        raise InvalidParameterError("profile requires at least two solitons")
    if not alpha > 0 or not kappa > 0:
        raise InvalidParameterError("alpha and kappa must be positive")
    gamma = interaction_gammas(K)
    diffs = -np.log(2.0 * alpha / kappa * gamma)
    tau = np.concatenate(([0.0], np.cumsum(diffs)))
    tau -= tau.mean()
    return AsymptoticProfile(K=K, tau=tau, gamma=gamma, alpha=alpha, kappa=kappa)


def exact_profile_y(t: float, profile: AsymptoticProfile) -> np.ndarray:
    """Centers (k - (K+1)/2) log t + tau_k of the exact solution."""
    if not t > 0:
        raise InvalidParameterError("time must be positive")
    k = np.arange(1, profile.K + 1)
    return (k - (profile.K + 1) / 2.0) * np.log(t) + profile.tau


def center_rhs(y: np.ndarray, alpha: float, kappa: float) -> np.ndarray:
    """Right-hand side of the center system (alternating-sign couplings)."""
    coupling = kappa / (2.0 * alpha) * np.exp(-np.diff(y))
    rhs = np.zeros_like(y)
    rhs[:-1] -= coupling
    rhs[1:] += coupling
    return rhs


def profile_residual(t: float, profile: AsymptoticProfile) -> float:
    """Max-norm defect of the exact profile in the center system."""
    y = exact_profile_y(t, profile)
    k = np.arange(1, profile.K + 1)
    ydot = (k - (profile.K + 1) / 2.0) / t
    return float(np.max(np.abs(ydot - center_rhs(y, profile.alpha, profile.kappa))))


def integrate_centers(
    y0: OdeState,
    t_end: float,
    tol: float = 1e-10,
    *,
    alpha: float,
    kappa: float,
    n_samples: int = 256,
) -> tuple[np.ndarray, np.ndarray]:
    """Adaptive high-order integration of the center system.

    Integration runs in s = log t, which renders the decades towards
    t_end equally cheap.  Returns log-spaced sample times and the centers
    at those times, shape (n_samples, K).
    """
    if not t_end > y0.t:
        raise InvalidParameterError("t_end must exceed the initial time")

    def rhs(s, y):
        return np.exp(s) * center_rhs(y, alpha, kappa)

    s_span = (np.log(y0.t), np.log(t_end))
    s_eval = np.linspace(s_span[0], s_span[1], n_samples)
    sol = solve_ivp(
        rhs, s_span, y0.y, method="DOP853", rtol=tol, atol=1e-12, t_eval=s_eval
    )
    if not sol.success:
        raise NumericalFailureError(f"center integration failed: {sol.message}")
    return np.exp(sol.t), sol.y.T


def phi(varpi: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Vector field of the recentred deviation system."""
    varpi = np.asarray(varpi, dtype=float)
    g = gamma * (np.exp(-np.diff(varpi)) - 1.0)
    out = np.zeros_like(varpi)
    out[:-1] -= g
    out[1:] += g
    return out


def dphi0(K: int, gamma: np.ndarray) -> np.ndarray:
    """Jacobian of phi at the origin: symmetric tridiagonal, row sums zero."""
    if K < 2:
        raise InvalidParameterError("need at least two components")
    m = np.zeros((K, K))
    for k in range(K - 1):
        m[k, k] -= gamma[k]
        m[k + 1, k + 1] -= gamma[k]
        m[k, k + 1] += gamma[k]
        m[k + 1, k] += gamma[k]
    return m


@dataclass(frozen=True)
class XiRun:
    """Samples of the deviation flow and its scaled distance to the mean."""

    t: np.ndarray
    varpi: np.ndarray  # (n_samples, K)
    deviation: np.ndarray  # || varpi - (varpi0, e1) e1 ||
    scaled_deviation: np.ndarray  # deviation * t / t0
    fitted_rate: float  # slope of log deviation vs log t


def xi_convergence_run(
    xi0: np.ndarray, t0: float, t_end: float, *, n_samples: int = 200, tol: float = 1e-10
) -> XiRun:
    """Integrate the deviation system and measure its collapse to the mean.

    The flow conserves the mean; the deviation from the conserved mean
    direction contracts like 1/t, so the scaled deviation stays bounded.
    """
    xi0 = np.asarray(xi0, dtype=float)
    K = xi0.size
    if K < 2:
        raise InvalidParameterError("need at least two components")
    if not 0 < t0 < t_end:
        raise InvalidParameterError("need 0 < t0 < t_end")
    gamma = interaction_gammas(K)

    def rhs(_s, w):
        return phi(w, gamma)

    s_span = (np.log(t0), np.log(t_end))
    s_eval = np.linspace(s_span[0], s_span[1], n_samples)
    sol = solve_ivp(rhs, s_span, xi0, method="DOP853", rtol=tol, atol=1e-12, t_eval=s_eval)
    if not sol.success:
        raise NumericalFailureError(f"deviation integration failed: {sol.message}")
    t = np.exp(sol.t)
    w = sol.y.T
    mean_component = np.full(K, xi0.mean())
    dev = np.linalg.norm(w - mean_component, axis=1)
    scaled = dev * (t / t0)

    usable = dev > 1e-13
    if np.count_nonzero(usable) >= 8:
        slope = float(np.polyfit(np.log(t[usable]), np.log(dev[usable]), 1)[0])
    else:
        slope = float("-inf")  # deviation at roundoff throughout
    return XiRun(t=t, varpi=w, deviation=dev, scaled_deviation=scaled, fitted_rate=slope)
