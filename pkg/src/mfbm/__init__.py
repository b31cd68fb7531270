"""Strong asymptotic arbitrage in mixed fractional Black-Scholes markets.

Exact Gaussian relative entropy of the grid laws, log-likelihood-ratio
statistics, Monte Carlo separating sets and the restricted two-date market.
"""

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    DomainError,
    InsufficientData,
    InvalidGrid,
    InvalidPartition,
    MFBMError,
    NotPositiveDefinite,
)
from .fbm import (
    FbmCovariance,
    IncrementSample,
    fbm_increment_covariance,
    sample_drifted_bm_increments,
    sample_mixed_increments,
)
from .market import (
    EntropyRow,
    ModelMatrices,
    build_model_matrices,
    entropy_lower_bound,
    entropy_sweep,
    market_measures,
    relative_entropy_grid,
    sigma1_closed_form,
    wiener_relation_residual,
)
from .measures import (
    Box,
    DichotomyVerdict,
    GaussianMeasure,
    GridPartition,
    LogLRStats,
    Verdict,
    dichotomy_classify,
    gaussian_kl,
    log_likelihood_ratio,
    loglr_moments,
    mc_kl_check,
    partition_kl,
)
from .numerics import (
    CholeskyFactor,
    SeededStream,
    cholesky_factor,
    normal_draw,
    spd_solve,
    symmetric_eigenvalues,
)
from .params import ModelParams
from .restricted import lognormal_density, restricted_market_report, tilt_weight
from .separation import SaaConclusion, SeparationReport, SeparationRow, saa_experiment, separating_set_probabilities

__version__ = "0.1.0"
