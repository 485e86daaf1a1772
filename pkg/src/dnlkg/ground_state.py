"""Closed-form ground state of Q'' - Q + Q^p = 0 and its interaction constants.

The profile, its derivative and the tail amplitude are evaluated from
overflow-safe closed forms; the integral constants (squared derivative
norm, interaction constant, soliton energy) come from composite trapezoid
quadrature on a truncated line, which is accurate to roundoff for these
exponentially decaying integrands.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NumericalFailureError


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters: damping coefficient and nonlinearity power."""

    alpha: float
    p: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidParameterError(f"alpha must be positive, got {self.alpha}")
        if not self.p > 2:
            raise InvalidParameterError(f"p must exceed 2, got {self.p}")


@dataclass(frozen=True)
class QuadratureConfig:
    """Truncated-line composite trapezoid settings for the constants."""

    half_width: float = 40.0
    dx: float = 0.005

    def __post_init__(self):
        if self.half_width < 30.0:
            raise InvalidParameterError("quadrature half-width must be >= 30")
        if not 0 < self.dx <= 0.01:
            raise InvalidParameterError("quadrature spacing must be in (0, 0.01]")


@dataclass(frozen=True)
class GroundStateConsts:
    """Tail amplitude c_Q, c_1 = ||Q'||^2, interaction constant kappa, energy E_Q."""

    c_Q: float
    c_1: float
    kappa: float
    E_Q: float

    def __post_init__(self):
        for name in ("c_Q", "c_1", "kappa", "E_Q"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive")


def _check_p(p: float):
    if not p > 2:
        raise InvalidParameterError(f"p must exceed 2, got {p}")


def tail_amplitude(p: float) -> float:
    """Coefficient of the e^{-|x|} tail of the ground state."""
    _check_p(p)
    return (2.0 * p + 2.0) ** (1.0 / (p - 1.0))


def eval_Q(p: float, x) -> np.ndarray:
    """Ground-state profile ((p+1) / (2 cosh^2((p-1)x/2)))^{1/(p-1)}.

    Evaluated as c_Q e^{-|x|} (1 + e^{-(p-1)|x|})^{-2/(p-1)}, which is the
    same function but immune to cosh overflow for large |x|.
    """
    _check_p(p)
    ax = np.abs(np.asarray(x, dtype=float))
    return tail_amplitude(p) * np.exp(-ax) * (1.0 + np.exp(-(p - 1.0) * ax)) ** (-2.0 / (p - 1.0))


def eval_Q_prime(p: float, x) -> np.ndarray:
    """Analytic derivative  Q'(x) = -Q(x) tanh((p-1)x/2); odd in x."""
    _check_p(p)
    x = np.asarray(x, dtype=float)
    return -eval_Q(p, x) * np.tanh(0.5 * (p - 1.0) * x)


def eval_Q_second(p: float, x) -> np.ndarray:
    """Q''(x) via the profile equation Q'' = Q - Q^p."""
    q = eval_Q(p, x)
    return q - q**p


def residual_Q(p: float, grid) -> float:
    """Max-norm residual of the profile equation under central differences.

    Second-order accurate: halving the grid spacing divides the result by
    about four.
    """
    from .grid import second_difference

    q = eval_Q(p, grid.x)
    res = second_difference(grid, q) - q + q**p
    interior = res[1:-1]  # Dirichlet rows see the (exponentially small) tail
    return float(np.max(np.abs(interior)))


def _trapz(f: np.ndarray, h: float) -> float:
    return h * (float(np.sum(f)) - 0.5 * (float(f[0]) + float(f[-1])))


def _integrals(p: float, half_width: float, h: float) -> tuple[float, float, float]:
    n = int(round(2.0 * half_width / h)) + 1
    x = np.linspace(-half_width, half_width, n)
    q = eval_Q(p, x)
    qp = eval_Q_prime(p, x)
    c1 = _trapz(qp * qp, h)
    interaction = _trapz(q**p * np.exp(-x), h)
    qpow = _trapz(q ** (p + 1.0), h)
    return c1, interaction, qpow


def compute_constants(
    params: ModelParams, quad: QuadratureConfig | None = None
) -> GroundStateConsts:
    """Tail amplitude (closed form) plus the quadrature constants.

    Raises NumericalFailureError if halving the quadrature spacing moves
    any constant by more than 1e-9 relative.
    """
    quad = quad or QuadratureConfig()
    p = params.p
    c_Q = tail_amplitude(p)

    c1, interaction, qpow = _integrals(p, quad.half_width, quad.dx)
    c1_f, interaction_f, qpow_f = _integrals(p, quad.half_width, quad.dx / 2.0)
    for coarse, fine in ((c1, c1_f), (interaction, interaction_f), (qpow, qpow_f)):
        if abs(coarse - fine) > 1e-9 * abs(fine):
            raise NumericalFailureError(
                "quadrature for ground-state constants did not converge under refinement"
            )

    kappa = c_Q / c1_f * interaction_f
    e_q = (0.5 - 1.0 / (p + 1.0)) * qpow_f
    return GroundStateConsts(c_Q=c_Q, c_1=c1_f, kappa=kappa, E_Q=e_q)
