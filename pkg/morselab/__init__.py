"""
morselab - a numerical lab for gradient flows, Morse theory and Lojasiewicz exponents.

Integrate the negative gradient flow of a scalar field, locate and classify
its critical points, trace the connections between them and measure the
exponents that govern convergence near degenerate critical sets.

Example:
    >>> from morselab import create_field, integrate_flow, estimate_lojasiewicz
    >>> f = create_field("power_well", {"k": 2})
    >>> traj = integrate_flow(f, [1.0])
    >>> round(estimate_lojasiewicz(f, traj, [0.0], f_p=0.0).exponent, 2)
    0.75
"""

__version__ = "0.3.0"

# Exceptions
from .exceptions import (
    MorselabError,
    InputError,
    ParseError,
    UnknownIdentifierError,
    UnknownFunctionError,
    IntegrationError,
    CriticalPointNotFound,
    UnsupportedError,
    InsufficientDataError,
    ConfigurationError,
    ConfigSyntaxError,
    UnknownFieldError,
)

# Expressions
from .expr import parse, differentiate, simplify

# Fields
from .fields import (
    ScalarField,
    ReversedField,
    Domain,
    DomainKind,
    ExpressionField,
    CatalogField,
    FieldRegistry,
    create_field,
    evaluate,
    gradient,
    hessian,
    finite_diff_gradient,
)

# Critical manifolds
from .manifolds import CriticalManifoldModel, PointManifold, AxisLine, UnitCircle

# Flow
from .flow import (
    IntegratorConfig,
    Trajectory,
    StopReason,
    integrate_flow,
    integrate_many,
    dissipation_residual,
    tail_arc_length,
    event_crossings,
)

# Critical points and connections
from .critical import (
    CriticalPoint,
    PointClass,
    classify,
    find_critical,
    sweep_critical,
    BranchKind,
    manifold_branches,
    find_connections,
    level_slice_samples,
    normal_hessian,
    bott_dimension,
    restriction_extremum,
    convergence_survey,
    enter_once_check,
    length_survey,
)

# Exponents and limits
from .analysis import (
    AnalysisFit,
    estimate_lojasiewicz,
    check_distance_inequality,
    tail_length_rate,
    exponential_decay_rate,
    distance_envelope,
    lojasiewicz_threshold,
    normal_bias,
    secant_limit,
    z_set_crossings,
    dense_limit_survey,
)

# Logging
from .log_utils import get_logger, configure_logging, set_level

__all__ = [
    "__version__",
    "MorselabError",
    "InputError",
    "ParseError",
    "UnknownIdentifierError",
    "UnknownFunctionError",
    "IntegrationError",
    "CriticalPointNotFound",
    "UnsupportedError",
    "InsufficientDataError",
    "ConfigurationError",
    "ConfigSyntaxError",
    "UnknownFieldError",
    "parse",
    "differentiate",
    "simplify",
    "ScalarField",
    "ReversedField",
    "Domain",
    "DomainKind",
    "ExpressionField",
    "CatalogField",
    "FieldRegistry",
    "create_field",
    "evaluate",
    "gradient",
    "hessian",
    "finite_diff_gradient",
    "CriticalManifoldModel",
    "PointManifold",
    "AxisLine",
    "UnitCircle",
    "IntegratorConfig",
    "Trajectory",
    "StopReason",
    "integrate_flow",
    "integrate_many",
    "dissipation_residual",
    "tail_arc_length",
    "event_crossings",
    "CriticalPoint",
    "PointClass",
    "classify",
    "find_critical",
    "sweep_critical",
    "BranchKind",
    "manifold_branches",
    "find_connections",
    "level_slice_samples",
    "normal_hessian",
    "bott_dimension",
    "restriction_extremum",
    "convergence_survey",
    "enter_once_check",
    "length_survey",
    "AnalysisFit",
    "estimate_lojasiewicz",
    "check_distance_inequality",
    "tail_length_rate",
    "exponential_decay_rate",
    "distance_envelope",
    "lojasiewicz_threshold",
    "normal_bias",
    "secant_limit",
    "z_set_crossings",
    "dense_limit_survey",
    "get_logger",
    "configure_logging",
    "set_level",
]
