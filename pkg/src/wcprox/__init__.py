"""Inexact proximal point method for weakly convex functions.

The implicit proximal step is solved by a contraction on the Moreau
envelope gradient, with sampled checks of every inequality the method
relies on.
"""
from ._kernels import COMPILED_AVAILABLE, active_backend, get_backend, set_backend
from .algorithm import (
    LocalityConfig,
    RunReport,
    Schedule,
    StepRule,
    Termination,
    check_assumption1,
    check_complexity,
    check_descent,
    check_fejer,
    check_summability,
    complexity_bound,
    lemma45_pair_bound,
    make_locality,
    pair_argmin,
    run,
    subgradient_baseline,
    validate_schedule,
)
from .envelope import (
    ProxQuery,
    ProxResult,
    check_prox_lipschitz,
    envelope_gradient,
    envelope_value,
    prox,
    prox_grid_oracle,
)
from .errors import (
    ConfigurationError,
    InstanceError,
    LocalityError,
    NonconvergenceError,
    OutsideDomainError,
    ParameterError,
    PreconditionError,
    ScheduleError,
    UnsupportedDimensionError,
    WCProxError,
)
from .fixedpoint import (
    ContractionConstants,
    InnerSolveResult,
    S_map,
    derive_constants,
    phi_map,
    recover_prox,
    solve_fixed_point,
    verify_prox_identity,
)
from .problems import (
    PRESETS,
    ZOO,
    Box,
    Problem,
    StationaryPoint,
    check_quadratic_lower_estimator,
    check_weak_convexity,
    dc_decomposition,
    get_instance,
    make_abs_quadratic,
    make_example1,
    make_quadratic,
)
from .report import CheckReport

__version__ = "0.1.0"
