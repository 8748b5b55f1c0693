"""Solver and certificate checker for Caputo fractional boundary value
problems with ratio boundary conditions u(0) = xi u(1),
D^beta u(0) = xi D^beta u(1) on [0, 1]."""

from .certify import (
    AffinePsi,
    Certificate,
    ConstantPsi,
    GrowthSpec,
    certify,
    contraction_constant,
    existence_radius,
    theta,
)
from .errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    EvaluationError,
    FracbvpError,
    ParseError,
    SingularityError,
    UnknownIdentifierError,
)
from .expr import evaluate, lipschitz_estimate, parse, to_source
from .fracops import (
    Grid,
    GridFunction,
    caputo_grid,
    caputo_monomial,
    frac_integral_grid,
    frac_integral_monomial,
    gamma,
)
from .greens import (
    KernelWeights,
    ProblemParams,
    companion_eval,
    companion_row_weights,
    companion_weight_matrix,
    green_branch_value,
    green_eval,
    green_row_weights,
    green_weight_matrix,
    gstar,
    gstar_coarse_bound,
)
from .solver import (
    IterationReport,
    ProblemSpec,
    ResidualReport,
    SolutionPair,
    apply_T,
    linear_solve,
    pair_distance,
    pair_norm,
    picard_solve,
    residual,
    zero_pair,
)

__version__ = "0.1.0"

__all__ = [
    "AffinePsi",
    "Certificate",
    "ConfigError",
    "ConstantPsi",
    "DivergenceError",
    "DomainError",
    "EvaluationError",
    "FracbvpError",
    "Grid",
    "GridFunction",
    "GrowthSpec",
    "IterationReport",
    "KernelWeights",
    "ParseError",
    "ProblemParams",
    "ProblemSpec",
    "ResidualReport",
    "SingularityError",
    "SolutionPair",
    "UnknownIdentifierError",
    "apply_T",
    "caputo_grid",
    "caputo_monomial",
    "certify",
    "companion_eval",
    "companion_row_weights",
    "companion_weight_matrix",
    "contraction_constant",
    "evaluate",
    "existence_radius",
    "frac_integral_grid",
    "frac_integral_monomial",
    "gamma",
    "green_branch_value",
    "green_eval",
    "green_row_weights",
    "green_weight_matrix",
    "gstar",
    "gstar_coarse_bound",
    "linear_solve",
    "lipschitz_estimate",
    "pair_distance",
    "pair_norm",
    "parse",
    "picard_solve",
    "residual",
    "theta",
    "to_source",
    "zero_pair",
]
