"""Discrete linearized operator around the ground state and its spectrum.

The operator -d^2/dx^2 + 1 - p Q^{p-1} is assembled as a symmetric
tridiagonal matrix on the interior nodes of a Dirichlet-truncated grid.
The bottom of the spectrum (one negative eigenvalue, a near-zero kernel
direction, the continuum edge) is found by Sturm-sequence bisection with
inverse iteration, as provided by LAPACK through scipy.  The negative
eigenvalue feeds the exponential rate constants of the damped flow.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal

from .errors import InvalidParameterError, NumericalFailureError
from .grid import Grid1D, l2_inner
from .ground_state import eval_Q, eval_Q_prime


@dataclass(frozen=True)
class TridiagonalOperator:
    """Symmetric tridiagonal action on interior nodes, Dirichlet ends."""

    grid: Grid1D
    diag: np.ndarray  # length n-2
    off: np.ndarray  # length n-3

    def apply(self, u: np.ndarray) -> np.ndarray:
        """Matrix action on a full-grid function (ends treated as zero)."""
        w = u[1:-1]
        out = np.zeros_like(u)
        core = self.diag * w
        core[:-1] += self.off * w[1:]
        core[1:] += self.off * w[:-1]
        out[1:-1] = core
        return out

    def quad_form(self, u: np.ndarray) -> float:
        """dx-weighted quadratic form <Lu, u>."""
        return l2_inner(self.grid, self.apply(u), u)


def assemble_L(p: float, grid: Grid1D) -> TridiagonalOperator:
    """Central-difference discretization of -d2 + 1 - p Q^{p-1}."""
    if not p > 2:
        raise InvalidParameterError(f"p must exceed 2, got {p}")
    x = grid.x[1:-1]
    inv_h2 = 1.0 / (grid.dx * grid.dx)
    diag = 2.0 * inv_h2 + 1.0 - p * eval_Q(p, x) ** (p - 1.0)
    off = np.full(grid.n - 3, -inv_h2)
    return TridiagonalOperator(grid=grid, diag=diag, off=off)


def eigenvalues_low(op: TridiagonalOperator, k: int = 3) -> np.ndarray:
    """The k lowest eigenvalues, ascending."""
    vals = eigh_tridiagonal(
        op.diag, op.off, select="i", select_range=(0, k - 1), eigvals_only=True
    )
    return vals


def smallest_eigenpair(op: TridiagonalOperator) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of the operator.

    The eigenvector is returned on the full grid (zero at the ends),
    normalized in the dx-weighted L2 inner product, with positive value
    at the grid center.
    """
    try:
        vals, vecs = eigh_tridiagonal(op.diag, op.off, select="i", select_range=(0, 0))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalFailureError(f"tridiagonal eigensolve failed: {exc}") from exc
    lam = float(vals[0])
    y = np.zeros(op.grid.n)
    y[1:-1] = vecs[:, 0]
    y /= np.sqrt(l2_inner(op.grid, y, y))
    center = op.grid.n // 2
    if y[center] < 0:
        y = -y
    return lam, y


class RateConstants(NamedTuple):
    nu_plus: float
    nu_minus: float
    zeta_plus: float
    zeta_minus: float
    beta: float


def rate_constants(alpha: float, nu0: float) -> RateConstants:
    """Exponential rates nu+- = -alpha +- s, zeta+- = alpha +- s, beta = 1/(2s)
    with s = sqrt(alpha^2 + nu0^2)."""
    if not alpha > 0 or not nu0 > 0:
        raise InvalidParameterError("alpha and nu0 must be positive")
    s = np.hypot(alpha, nu0)
    return RateConstants(
        nu_plus=-alpha + s,
        nu_minus=-alpha - s,
        zeta_plus=alpha + s,
        zeta_minus=alpha - s,
        beta=1.0 / (2.0 * s),
    )


def coercivity_probe(
    op: TridiagonalOperator, eps: np.ndarray, Y: np.ndarray, Qprime: np.ndarray
) -> tuple[float, float, float]:
    """Quadratic form <L eps, eps> together with the projections on Y and Q'."""
    g = op.grid
    return op.quad_form(eps), l2_inner(g, eps, Y), l2_inner(g, eps, Qprime)


@dataclass(frozen=True)
class SpectralData:
    """Unstable eigenpair of the linearized operator plus derived rates.

    Immutable after construction; safe to share between concurrent runs.
    """

    p: float
    alpha: float
    grid: Grid1D
    nu0_sq: float
    Y: np.ndarray
    nu0: float = field(init=False)
    nu_plus: float = field(init=False)
    nu_minus: float = field(init=False)
    zeta_plus: float = field(init=False)
    zeta_minus: float = field(init=False)
    beta: float = field(init=False)

    def __post_init__(self):
        if not self.nu0_sq > 0:
            raise NumericalFailureError(
                f"expected a negative bottom eigenvalue, got {-self.nu0_sq}"
            )
        nu0 = float(np.sqrt(self.nu0_sq))
        rates = rate_constants(self.alpha, nu0)
        object.__setattr__(self, "nu0", nu0)
        for name, value in rates._asdict().items():
            object.__setattr__(self, name, value)

    @property
    def _spline(self) -> CubicSpline:
        cached = self.__dict__.get("_spline_obj")
        if cached is None:
            cached = CubicSpline(self.grid.x, self.Y, bc_type="natural")
            self.__dict__["_spline_obj"] = cached
        return cached

    def y_at(self, x) -> np.ndarray:
        """Unstable eigenfunction sampled at arbitrary positions (0 off-grid)."""
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) < self.grid.half_width
        out = np.zeros_like(x)
        out[inside] = self._spline(x[inside])
        return out

    def as_dict(self) -> dict:
        return {
            "nu0_sq": self.nu0_sq,
            "nu_plus": self.nu_plus,
            "nu_minus": self.nu_minus,
            "zeta_plus": self.zeta_plus,
            "zeta_minus": self.zeta_minus,
            "beta": self.beta,
        }


def compute_spectral_data(
    p: float, alpha: float, half_width: float = 40.0, n: int = 8192
) -> SpectralData:
    """Assemble, solve and package the spectral data on one grid."""
    grid = Grid1D(half_width, n)
    op = assemble_L(p, grid)
    lam, y = smallest_eigenpair(op)
    return SpectralData(p=p, alpha=alpha, grid=grid, nu0_sq=-lam, Y=y)


_SPECTRAL_CACHE: dict[tuple, SpectralData] = {}


def cached_spectral_data(
    p: float, alpha: float, half_width: float = 40.0, n: int = 8192
) -> SpectralData:
    """Memoized variant of compute_spectral_data keyed on all inputs."""
    key = (float(p), float(alpha), float(half_width), int(n))
    if key not in _SPECTRAL_CACHE:
        _SPECTRAL_CACHE[key] = compute_spectral_data(*key[:3], n=key[3])
    return _SPECTRAL_CACHE[key]


def kernel_direction(p: float, grid: Grid1D) -> np.ndarray:
    """Discretized Q', the kernel direction of the continuum operator."""
    return eval_Q_prime(p, grid.x)
