"""Numerical algebra of bivariate copulas.

Core objects (M, W, Pi, FGM, shuffles of M, grid copulas), measurable
one-parameter families, classical and family-generalized star products
computed by breakpoint-aware adaptive quadrature, verification
experiments for the algebraic laws, and an expression-based CLI.
"""

from .copulas import (
    CopulaError,
    DomainError,
    ConstructionError,
    FormatError,
    Copula,
    FrechetM,
    FrechetW,
    ProductPi,
    FGMCopula,
    ShuffleOfM,
    StraightShuffle,
    TransposedCopula,
    GridCopula,
    Rectangle,
    Segment,
    ValidationReport,
    M,
    W,
    PI,
    straight_shuffle,
    shuffle_from_grid,
    grid_from_copula,
    sup_distance,
    sup_distance_witness,
    validate,
    fd_partial1,
    fd_partial2,
    read_grid_csv,
    write_grid_csv,
)
from .families import (
    CLASS_MEASURABLE,
    CLASS_PIECEWISE,
    CopulaFamily,
    ConstantFamily,
    PiecewiseConstantFamily,
    FGMCurveFamily,
    family_eval,
    measurability_class,
    ae_equal,
    family_integral,
    midpoint_fgm_approximation,
)
from .products import (
    QuadratureConfig,
    ProductResult,
    NonConvergenceError,
    ComputedCopula,
    ShuffleStarProduct,
    WRightProduct,
    WLeftProduct,
    star,
    star_c,
    invertible_reduction,
    shuffle_star,
    integrate,
    FAST_PATHS,
)
from .verify import (
    VerificationReport,
    check_identity,
    check_zero_necessary,
    check_zero_candidate,
    fgm_counterexample,
    convergence_study,
    run_suite,
    SUITES,
    reports_to_text,
    reports_to_json,
)

__version__ = "0.1.0"

__all__ = [
    "CopulaError",
    "DomainError",
    "ConstructionError",
    "FormatError",
    "Copula",
    "FrechetM",
    "FrechetW",
    "ProductPi",
    "FGMCopula",
    "ShuffleOfM",
    "StraightShuffle",
    "TransposedCopula",
    "GridCopula",
    "Rectangle",
    "Segment",
    "ValidationReport",
    "M",
    "W",
    "PI",
    "straight_shuffle",
    "shuffle_from_grid",
    "grid_from_copula",
    "sup_distance",
    "sup_distance_witness",
    "validate",
    "fd_partial1",
    "fd_partial2",
    "read_grid_csv",
    "write_grid_csv",
    "CLASS_MEASURABLE",
    "CLASS_PIECEWISE",
    "CopulaFamily",
    "ConstantFamily",
    "PiecewiseConstantFamily",
    "FGMCurveFamily",
    "family_eval",
    "measurability_class",
    "ae_equal",
    "family_integral",
    "midpoint_fgm_approximation",
    "QuadratureConfig",
    "ProductResult",
    "NonConvergenceError",
    "ComputedCopula",
    "ShuffleStarProduct",
    "WRightProduct",
    "WLeftProduct",
    "star",
    "star_c",
    "invertible_reduction",
    "shuffle_star",
    "integrate",
    "FAST_PATHS",
    "VerificationReport",
    "check_identity",
    "check_zero_necessary",
    "check_zero_candidate",
    "fgm_counterexample",
    "convergence_study",
    "run_suite",
    "SUITES",
    "reports_to_text",
    "reports_to_json",
    "__version__",
]
