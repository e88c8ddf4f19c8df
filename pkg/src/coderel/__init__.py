"""Model-based reliability estimation for nominal-scale coder agreement.

The package simulates rating experiments in which each coder recognizes an
item's true category with probability ``beta`` and otherwise falls back on
a shared a-priori distribution, recovers ``beta`` from observed agreement
moments via closed-form formulas, polishes the estimate by constrained
least squares, and quantifies estimation accuracy with Monte-Carlo sweeps.

The numeric fitting kernels run compiled when the extension is available;
``coderel.BACKEND`` names the active implementation.
"""

from .backend import BACKEND
from .baselines import CoefficientReport, coefficients
from .coincidence import (
    CoincidenceStats,
    StatsSource,
    empirical_stats,
    enumerate_stats_oracle,
    read_stats_csv,
    theoretical_stats,
    write_stats_csv,
)
from .estimators import (
    BetaInterval,
    EstimateResult,
    IndeterminacyRegion,
    beta_bounds,
    beta_p_known,
    beta_pairwise,
    beta_tau_eq_p,
    beta_tau_known,
    beta_triple,
    beta_two_star,
    default_excess_threshold,
    detect_cstar,
    equivalent_model_single_category,
    equivalent_model_two_category,
    estimate,
    indeterminacy_region,
    result_to_kv_text,
)
from .harness import (
    ModelSpec,
    QuantileReport,
    QuantileRow,
    SweepConfig,
    apportion_counts,
    quantiles,
    run_replications,
    sweep,
    write_report_csv,
)
from .model import (
    AprioriDist,
    CategorySet,
    CoderModel,
    RatingsMatrix,
    TrueLabeling,
    map_categories,
    read_ratings_csv,
    sample_ratings,
    write_ratings_csv,
)
from .refine import RefineOptions, lsq_objective, refine
from .seeding import mix64

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    "AprioriDist",
    "BetaInterval",
    "CategorySet",
    "CoderModel",
    "CoefficientReport",
    "CoincidenceStats",
    "EstimateResult",
    "IndeterminacyRegion",
    "ModelSpec",
    "QuantileReport",
    "QuantileRow",
    "RatingsMatrix",
    "RefineOptions",
    "StatsSource",
    "SweepConfig",
    "TrueLabeling",
    "apportion_counts",
    "beta_bounds",
    "beta_p_known",
    "beta_pairwise",
    "beta_tau_eq_p",
    "beta_tau_known",
    "beta_triple",
    "beta_two_star",
    "coefficients",
    "default_excess_threshold",
    "detect_cstar",
    "empirical_stats",
    "enumerate_stats_oracle",
    "equivalent_model_single_category",
    "equivalent_model_two_category",
    "estimate",
    "indeterminacy_region",
    "lsq_objective",
    "map_categories",
    "mix64",
    "quantiles",
    "read_ratings_csv",
    "read_stats_csv",
    "refine",
    "result_to_kv_text",
    "run_replications",
    "sample_ratings",
    "sweep",
    "theoretical_stats",
    "write_ratings_csv",
    "write_report_csv",
    "write_stats_csv",
]
