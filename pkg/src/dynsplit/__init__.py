"""Operator splitting for the heat equation with dynamical boundary conditions."""

from .analysis import (
    ConvergenceReport,
    Exact,
    ExperimentSpec,
    FineRun,
    convergence_study,
    convolution_oracle,
    detect_plateau,
    dyadic_taus,
    exact_boundary_example2,
    exact_solution_example1,
    fit_order,
    reference_solution,
    relative_error,
    vn_rate_check,
)
from .errors import (
    ConfigurationError,
    ContractError,
    DivisionDomainError,
    DynsplitError,
    FitError,
    UnsupportedDimensionError,
    UnsupportedSchemeError,
)
from .operators import (
    DomainParams,
    apply_boundary_matrix,
    boundary_propagate,
    dirichlet_lift,
    dst_forward,
    dst_inverse,
    heat_propagate,
    matrix_exp,
)
from .presets import example1_problem, example2_problem
from .splitting import (
    LIE,
    NAIVE_LIE,
    STRANG,
    CoupledState,
    Problem,
    Scheme,
    SchemeKind,
    TriangularState,
    apply_T1,
    apply_T2,
    apply_T3,
    apply_Vn,
    from_triangular,
    run,
    run_final,
    step,
    step_closed_form,
    step_naive,
    to_triangular,
)

__version__ = "0.1.0"
