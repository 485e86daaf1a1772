"""Desk-scale numerical laboratory for the 1D damped nonlinear Klein-Gordon
equation: ground-state constants, linearized spectrum, damped evolution,
multi-soliton modulation tracking, the exponential center system, and
threshold shooting experiments."""

from .errors import (
    BlowupError,
    BracketingError,
    FitWindowError,
    IllConditionedError,
    InvalidParameterError,
    NumericalFailureError,
    OutOfTubeError,
)
from .grid import Grid1D
from .ground_state import (
    GroundStateConsts,
    ModelParams,
    QuadratureConfig,
    compute_constants,
    eval_Q,
    eval_Q_prime,
    residual_Q,
)
from .interaction_ode import (
    AsymptoticProfile,
    OdeState,
    dphi0,
    exact_profile_y,
    integrate_centers,
    phi,
    tau_profile,
    xi_convergence_run,
)
from .modulation import Decomposition, Diagnostics, decompose, diagnostics, energy_expansion_check
from .solver import FieldState, StepConfig, dissipation_residual, energy, evolve, iterate, step
from .spectrum import (
    SpectralData,
    assemble_L,
    coercivity_probe,
    compute_spectral_data,
    rate_constants,
    smallest_eigenpair,
)
from .experiments import (
    BisectionConfig,
    RunConfig,
    RunRecord,
    build_W,
    classify_run,
    fit_asymptotics,
    run_scenario,
    same_sign_probe,
    shoot_single,
    shoot_two_soliton,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
