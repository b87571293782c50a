"""Tail behaviour of weighted sums of order statistics of dependent risks.

Closed-form first-order tail approximations, exact samplers for the supported
dependence models, seeded chunk-parallel Monte Carlo oracles, and empirical
diagnostics for the dependence and scaling conditions behind the
approximations.
"""

__version__ = "0.1.0"

from .asymptotics import (
    AtomC0,
    BetaC0,
    CteBounds,
    DavisResnickReport,
    FixedWeights,
    RandomWeights,
    approx_tail,
    approx_tail_random_weights,
    asymptotic_var,
    cte_bounds,
    davis_resnick_check,
)
from .diagnostics import (
    AssumptionReport,
    DiagnosticCurve,
    DiagnosticThresholds,
    assumption_report,
    check_conditional_smallness,
    check_cross_exceedance,
    check_h_properties,
    check_joint_exceedance,
    check_scaled_exceedance,
    default_tail_grid,
)
from .errors import (
    BracketingError,
    ConfigError,
    DomainError,
    InvalidModelError,
    OrdertailError,
    PlanError,
    QuadratureError,
    RejectionCapError,
    SimulationError,
)
from .experiments import (
    ExperimentConfig,
    RunManifest,
    builtin_configs,
    load_config,
    parse_config,
    run_experiment,
)
from .joint_models import (
    DominatingSet,
    FGMModel,
    GaussLognormalW,
    IndependentModel,
    JointRiskModel,
    ValidationReport,
    bivariate_orthant_survival,
    dominating_set,
    pairwise_joint_survival,
    sample_joint,
    validate_model,
)
from .marginals import (
    ConstantScaling,
    DiscreteAtoms,
    Exponential,
    HeavyWeibull,
    Lognormal,
    LognormalScaling,
    Marginal,
    Pareto,
    PowerOfScaling,
    PowerScaling,
    RandomizedLognormal,
    ScaledBeta,
    ScalingFunction,
    WeibullScaling,
    quantile,
    sample_marginal,
    scaling_eval,
    tail_eval,
)
from .montecarlo import (
    CteRatioEstimate,
    QuantileEstimate,
    RatioCurve,
    SimulationPlan,
    TailEstimate,
    estimate_cte_ratio,
    estimate_quantile,
    estimate_tail,
    estimate_tail_grid,
    ratio_curve,
    weighted_order_sum,
)
