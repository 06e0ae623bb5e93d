"""Infinitely divisible Arete noise for epsilon-differential privacy.

The Arete distribution is the sum of a Gamma difference and an independent
Laplace variable, tuned so that its expected magnitude decays exponentially
in epsilon while remaining infinitely divisible — the property that lets a
group of participants add noise shares whose total follows the central
distribution exactly.
"""

__version__ = "0.1.0"

from .distributions import (
    AreteMoments,
    AreteParams,
    GammaParams,
    LaplaceParams,
    StaircaseParams,
    arete_moments,
    sample_arete,
    sample_gamma,
    sample_laplace,
    sample_staircase,
    staircase_expected_abs,
    staircase_normalizer,
)
from .density import (
    DiscretizedDensity,
    GridSpec,
    ResolutionError,
    arete_density_grid,
    cdf_from_density,
    convolve,
    default_grid,
    discretize_gamma,
    discretize_laplace,
    grid_mean,
    grid_variance,
    lattice_points,
    reflect,
    regularized_lower_incomplete_gamma,
    staircase_density_grid,
    symmetry_defect,
    trim,
)
from .divisibility import (
    NoiseShare,
    NoiseShareSpec,
    arete_share,
    laplace_share,
    make_share,
    share_sum_samples,
    sum_shares,
)
from .fedsum import (
    InputError,
    SimConfig,
    SimMechanism,
    SimReport,
    compare_mechanisms,
    run_round,
    run_trials,
    total_noise_samples,
)
from .mechanisms import (
    DomainError,
    ErrorRow,
    MechanismConfig,
    MechanismKind,
    Mode,
    QueryResult,
    apply_mechanism,
    error_table,
    in_strict_domain,
    parameterize_arete,
    strict_epsilon_threshold,
)
from .privacy import (
    AnalyticBoundReport,
    PrivacyProfile,
    analytic_ratio_bound,
    empirical_privacy_loss,
    privacy_loss_curve,
    staircase_loss_curve,
    verify_parameter_setting,
)
from .rng import RngStream
from .search import Objective, SearchConfig, SearchTrace, evaluate_candidate, local_search
from .stats import KsResult, ks_critical_value, ks_two_sample

__all__ = [
    "__version__",
    "AreteMoments",
    "AreteParams",
    "GammaParams",
    "LaplaceParams",
    "StaircaseParams",
    "arete_moments",
    "sample_arete",
    "sample_gamma",
    "sample_laplace",
    "sample_staircase",
    "staircase_expected_abs",
    "staircase_normalizer",
    "DiscretizedDensity",
    "GridSpec",
    "ResolutionError",
    "arete_density_grid",
    "cdf_from_density",
    "convolve",
    "default_grid",
    "discretize_gamma",
    "discretize_laplace",
    "grid_mean",
    "grid_variance",
    "lattice_points",
    "reflect",
    "regularized_lower_incomplete_gamma",
    "staircase_density_grid",
    "symmetry_defect",
    "trim",
    "NoiseShare",
    "NoiseShareSpec",
    "arete_share",
    "laplace_share",
    "make_share",
    "share_sum_samples",
    "sum_shares",
    "InputError",
    "SimConfig",
    "SimMechanism",
    "SimReport",
    "compare_mechanisms",
    "run_round",
    "run_trials",
    "total_noise_samples",
    "DomainError",
    "ErrorRow",
    "MechanismConfig",
    "MechanismKind",
    "Mode",
    "QueryResult",
    "apply_mechanism",
    "error_table",
    "in_strict_domain",
    "parameterize_arete",
    "strict_epsilon_threshold",
    "AnalyticBoundReport",
    "PrivacyProfile",
    "analytic_ratio_bound",
    "empirical_privacy_loss",
    "privacy_loss_curve",
    "staircase_loss_curve",
    "verify_parameter_setting",
    "RngStream",
    "Objective",
    "SearchConfig",
    "SearchTrace",
    "evaluate_candidate",
    "local_search",
    "KsResult",
    "ks_critical_value",
    "ks_two_sample",
]
