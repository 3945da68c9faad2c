"""Block maxima estimators for time series extremes.

Disjoint and sliding block maxima, U-statistics of block maxima, their
asymptotic variances, simulation models and a Monte Carlo harness.
"""

from .asymvar import (
    AsymVarResult,
    H1Closure,
    I_jk,
    alpha_beta,
    ratio_curve,
    sigma2_db_variance_kernel,
    sigma2_kendall,
    sigma2_mc,
    sigma2_sb_variance_kernel,
)
from .blocks import BlockMaxSample, StandardizedSample, block_maxima, sliding_max, standardize
from .dependence import (
    InnovationCopula,
    Stdf,
    XiDependence,
    cxi_eval,
    ev_copula_cdf,
    gxi_cdf,
    lxi_eval,
    sample_ev,
    sample_gxi,
    stdf_eval,
)
from .evd import (
    GevParams,
    NormingSequence,
    armax_norming,
    gev_cdf,
    gev_moment,
    gev_quantile,
    gev_variance_tau2,
    gpd_cdf,
    gpd_quantile,
)
from .harness import (
    ExperimentConfig,
    MetricsRow,
    TruthValue,
    estimate_truth,
    parse_config,
    run_experiment,
    summarize,
)
from .tsgen import (
    ModelSpec,
    derive_seed,
    gen_armax,
    gen_bivariate,
    gen_car,
    gen_piecewise,
    generate,
    rng_stream,
    transform_margins,
)
from .ustat import (
    Kernel,
    UStatResult,
    bias_reduced_sliding,
    get_kernel,
    kendall_tau,
    kernel_eval,
    locscale_check,
    pwm_orderstat,
    u_statistic,
)

__version__ = "0.1.0"
