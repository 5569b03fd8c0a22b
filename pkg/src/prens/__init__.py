"""Physical realizability checks for stationary pure-state ensembles of open quantum systems."""

__version__ = "0.1.0"

from .ensemble import DiscreteEnsemble, PureState, check_represents, ensemble_density
from .errors import (
    ConfigError,
    InvalidInput,
    IoError,
    NonUniqueSteadyState,
    NotPSD,
    NumericalFailure,
    PrensError,
    SingularDynamics,
    Unsupported,
)
from .lindblad import Lindbladian, apply_lindbladian, propagate, steady_state, superoperator_matrix
from .pr_discrete import PRVerdict, RateMatrix, check_pr_discrete, jump_rates, stationarity_residual
from .pr_gaussian import LinearDynamics, check_pr_gaussian, excess_diffusion, weight_covariance

__all__ = [
    "ConfigError",
    "DiscreteEnsemble",
    "InvalidInput",
    "IoError",
    "Lindbladian",
    "LinearDynamics",
    "NonUniqueSteadyState",
    "NotPSD",
    "NumericalFailure",
    "PRVerdict",
    "PrensError",
    "PureState",
    "RateMatrix",
    "SingularDynamics",
    "Unsupported",
    "apply_lindbladian",
    "check_pr_discrete",
    "check_pr_gaussian",
    "check_represents",
    "ensemble_density",
    "excess_diffusion",
    "jump_rates",
    "propagate",
    "stationarity_residual",
    "steady_state",
    "superoperator_matrix",
    "weight_covariance",
]
