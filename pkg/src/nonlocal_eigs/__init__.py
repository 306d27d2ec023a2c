"""Principal half-eigenvalues of nonlocal Bellman-Isaacs operators with drift.

The package discretizes operators of the form

    I u(x) = inf_a sup_b { int (u(x+y) + u(x-y) - 2u(x)) K_ab(y) dy + c_ab . grad u(x) }

on bounded domains with zero exterior data, and provides

* boundary-exponent constants of the extremal operators (:mod:`.beta_constants`),
* a monotone discretization (:mod:`.nonlocal_op`) on uniform grids (:mod:`.grid`),
* Dirichlet solvers and structural checks (:mod:`.dirichlet_solver`),
* both principal half-eigenvalues by inverse power iteration (:mod:`.eigensolver`),
* the parabolic decay toward the principal eigenmode (:mod:`.parabolic`),
* independent reference computations (:mod:`.oracle`).
"""

__version__ = "0.1.0"

from .beta_constants import BetaProfile, c_constant, find_beta_root, profile, psi_beta
from .dirichlet_solver import (
    SolveConfig,
    SolveReport,
    abp_ratio,
    barrier_sign_check,
    boundary_exponent_fit,
    check_comparison,
    h_condition_check,
    max_principle_threshold,
    random_smooth_source,
    solve,
)
from .eigensolver import (
    EigenConfig,
    EigenResult,
    collatz_wielandt,
    domain_monotonicity,
    inverse_power,
    verify_simplicity,
)
from .errors import (
    AccuracyError,
    BracketError,
    ConfigurationError,
    ConvergenceError,
    DomainError,
    InsufficientDataError,
    NonlocalError,
    OracleMismatch,
)
from .grid import (
    BarrierParams,
    Domain,
    Grid,
    GridFunction,
    barrier_xi,
    build_grid,
    distance_to_boundary,
    interval_grid,
)
from .nonlocal_op import (
    EXTREMAL_MINUS,
    EXTREMAL_PLUS,
    Control,
    ControlFamily,
    KernelClass,
    build_quadrature,
    eval_extremal,
    eval_operator,
)
from .parabolic import decay_rate_fit, decay_ratio_series, step
