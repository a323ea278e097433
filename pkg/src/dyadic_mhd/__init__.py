"""Dyadic shell models for MHD and Hall-MHD with Lyapunov blow-up diagnostics."""
from .errors import (
    HypothesisError,
    InfeasibleError,
    InsufficientDataError,
    NonFiniteError,
    ParameterError,
    ShapeError,
    VariantError,
)
from .functionals import (
    LyapunovCoeffs,
    LyapunovVariant,
    cross_helicity,
    energy,
    lyapunov,
    select_coefficients,
    sobolev_norm,
)
from .integrator import (
    Event,
    EventKind,
    Outcome,
    StepControls,
    Trajectory,
    classify_outcome,
    integrate_adaptive,
    integrate_rk4,
)
from .shell_model import ModelSpec, ShellState, Variant, evaluate_rhs, jacobian

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
