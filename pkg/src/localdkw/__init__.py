"""Exact local Dvoretzky-Kiefer-Wolfowitz bounds for the empirical CDF.

Exact exceedance probabilities of the supremum deviation over a sub-interval
of CDF levels, their inverses (confidence radii), bands, CVaR and functional
bounds, and time-uniform radii.
"""
__version__ = "0.1.0"

from ._accel import get_backend, set_backend
from ._errors import (
    DeltaOverflow,
    EmptySample,
    EpsTooSmall,
    InvalidLedger,
    InvalidParams,
    InvalidQuery,
    LocalDkwError,
    NegativeSupport,
    PartitionIncompatible,
    SupportViolation,
    TooEarly,
    UnboundedSupport,
    UnsortedInput,
)
from .exact_dkw import (
    FULL,
    ExceedanceQuery,
    ExceedanceResult,
    TailSide,
    UnitInterval,
    exceedance,
    exceedance_probability,
    left_exceedance,
    massart_bound,
    right_exceedance,
    smirnov_full,
)
from .inversion import (
    ConfidenceBand,
    RadiusQuery,
    confidence_band,
    invert_radius,
    massart_radius,
    radius,
    tabulate,
)
from .mc_oracle import McConfig, McEstimate, mc_exceedance, sup_dev_left, sup_dev_right
from .risk import (
    EmpiricalCdf,
    LipschitzLedger,
    Partition,
    PhiSpec,
    cvar_integrated_point,
    cvar_loss_bounds,
    cvar_loss_point,
    cvar_reward_bounds,
    cvar_reward_point,
    functional_bounds,
    functional_bounds_from_quantiles,
    make_ecdf,
    value_at_risk,
)
from .time_uniform import (
    Schedule,
    TimeUniformConfig,
    build_schedule,
    g_value,
    peeling_rhs,
    q_sup,
    tu_radius,
    tu_radius_global,
)
