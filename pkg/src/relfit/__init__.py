"""Maximum likelihood estimation under relational models for contingency tables."""

from .estimator import RelationalMLE
from .exceptions import ConvergenceError, RelfitError, ValidationError
from .fit import (
    FitConfig,
    FitResult,
    extended_mle,
    g_ipf,
    ipf_gamma,
    mle_exists,
    preprocess_zero_margins,
)
from .geometry import (
    FacialSet,
    enumerate_facial_sets,
    facial_certificate,
    has_positive_preimage,
    minimal_facial_set,
)
from .linalg import (
    KernelBasis,
    ModelMatrix,
    exact_rank,
    kernel_basis,
    row_space_contains,
    validate_model_matrix,
)
from .model import (
    Distribution,
    DualReport,
    ModelParameters,
    ObservedTable,
    a_feasible,
    bregman_divergence,
    derive_q,
    dual_report,
    factor_parameters,
    variety_member,
)
from .simplex import LPResult, lp_solve

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "RelfitError",
    "ValidationError",
    "Distribution",
    "DualReport",
    "FacialSet",
    "FitConfig",
    "FitResult",
    "KernelBasis",
    "LPResult",
    "ModelMatrix",
    "ModelParameters",
    "ObservedTable",
    "RelationalMLE",
    "a_feasible",
    "bregman_divergence",
    "derive_q",
    "dual_report",
    "enumerate_facial_sets",
    "exact_rank",
    "extended_mle",
    "facial_certificate",
    "factor_parameters",
    "g_ipf",
    "has_positive_preimage",
    "ipf_gamma",
    "kernel_basis",
    "lp_solve",
    "minimal_facial_set",
    "mle_exists",
    "preprocess_zero_margins",
    "row_space_contains",
    "validate_model_matrix",
    "variety_member",
]
