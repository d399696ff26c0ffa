"""Solvers for the split equality fixed-point problem and its reductions."""
from .errors import (
    DomainError,
    NumericalFailureError,
    RejectedConfigError,
    RejectedInputError,
    RejectedParametersError,
    SefppError,
)
from .linalg import LinearOperator, adjoint_apply, apply, operator_norm
from .mappings import (
    AffineMapping,
    ConvexSet,
    NonlinearMapping,
    ProxFunction,
    check_quasi_pseudocontractive,
    estimate_lipschitz,
    evaluate,
    project,
    prox,
    resolvent_vi,
)
from .normalized import NormalizedOperator, default_eta_zeta, make_normalized, verify_lemma22
from .schedules import Schedule, tau_schedule
from .diagnostics import KnownSolution, check_fejer, gamma, residuals
from .solvers import (
    IterationTrace,
    SefppProblem,
    SolverConfig,
    baseline_cq,
    baseline_moudafi,
    solve,
    solve_decoupled_km,
    solve_known_norm,
    solve_norm_free,
    step_known_norm,
    step_norm_free,
)
from .applications import ScmpProblem, SvipProblem, solve_scmp, solve_sfp, solve_svip

__version__ = "0.1.0"
