"""Monte Carlo toolkit for normal-approximation rates of sphere-projected
martingale difference sequences."""

from .errors import (
    AccuracyError,
    ConfigError,
    DegenerateDirectionError,
    DimensionError,
    InsufficientTableError,
    InvalidSampleError,
    MartprojError,
    NonStationaryModelError,
    NumericFailureError,
    ResourceLimitError,
    UnsupportedCfError,
    UnsupportedMethodError,
)
from .moments import (
    BetaMoments,
    GammaEvent,
    TwoPointLaw,
    beta_moments,
    gamma_event,
    sample_surrogates,
    two_point_from_moments,
)
from .processes import (
    ArchMartingale,
    ArchModel,
    IidMartingale,
    MarkovMartingale,
    MartingaleModel,
    MomentTable,
    Rademacher,
    StandardGaussian,
    TruncatedChain,
    TwoPointInnovation,
    default_a_schedule,
    kernel_apply,
    moment_table,
    simulate_path,
    simulate_paths,
    stationary_distribution,
)
from .dependence import (
    ConditionReport,
    DeltaEstimate,
    GammaProfile,
    condition_report,
    coupling_delta_arch,
    gamma_exact_markov,
    gamma_mc_arch,
    mixing_condition_report,
)
from .distance import (
    CfGrid,
    KappaEstimate,
    KappaSummary,
    cf_distance_integral,
    cf_product_kolmogorov,
    conditional_kappa_mc,
    expected_kappa,
    kolmogorov_from_cf,
    kolmogorov_vs_normal,
)
from .experiments import (
    FitResult,
    RateRow,
    RateTable,
    RegressionRow,
    SweepConfig,
    loglog_fit,
    rate_sweep,
    regression_experiment,
)
from .rng import derive_rng
from .sphere import (
    CenteredWeights,
    OrthonormalBasis,
    SphereVector,
    centered_weights,
    centered_weights_batch,
    helmert_basis,
    project,
    project_centered,
    sample_uniform_sphere,
    x_star,
)

__version__ = "0.1.0"
