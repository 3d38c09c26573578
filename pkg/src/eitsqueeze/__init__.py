"""Steady-state spin squeezing in a double-Lambda cavity scheme."""

from .effective_model import (
    NoiseModel,
    SteadyState,
    diffusion_matrix,
    drift_matrix,
    noise_model,
    steady_state_with_field,
    steady_state_zero_field,
)
from .exceptions import ConvergenceError, NonStationaryError, ParameterError, UndefinedSpinError
from .fullmodel import FullModelState, compare_effective, full_steady_state
from .noise import (
    Covariance,
    SpectrumPoint,
    VarianceReport,
    solve_lyapunov,
    spectrum_analytic,
    spectrum_matrix,
    spin_variance_report,
    variance_analytic,
    variance_pipeline,
)
from .optimize import (
    OptimumResult,
    asymptotic_pumps,
    field_limit,
    field_scan,
    optimize_pumps,
    scaling_study,
)
from .params import EffectiveParams, SystemParams, derive_effective, realize_raw

__version__ = "0.1.0"
