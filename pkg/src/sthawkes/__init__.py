"""Multi-type spatio-temporal self-exciting process toolkit.

Simulation by thinning, maximum-likelihood fitting with randomized Fourier
spatial kernels and analytic gradients, baseline models, and evaluation.
"""

from .baselines import PoissonParams, fit_poisson, fit_spatial_poisson, nll_poisson
from .errors import (
    ConfigError,
    DataError,
    NumericalError,
    ParseError,
    STHawkesError,
    TrainingError,
)
from .events import (
    EventRecord,
    EventSequence,
    Rectangle,
    ScalingInfo,
    SplitSpec,
    concat,
    normalize_space,
    one_hot,
    parse_events,
    rescale_time,
    serialize_events,
    split_chronological,
)
from .evaluation import (
    EvalResult,
    FittedHawkes,
    FittedPoisson,
    evaluate,
    excitation_report,
    intensity_grid,
)
from .gradients import GradientSet, chain_softplus, finite_diff, grad_all, grad_raw
from .intensity import (
    BatchMatrices,
    HawkesParams,
    aic,
    aggregate,
    compensator_batch,
    compensator_full,
    compensator_window,
    count_parameters,
    decay_vector,
    evaluate_intensity,
    intensity_matrix,
    intensity_profile,
    nll,
)
from .optimizer import (
    FitConfig,
    FitReport,
    RawParams,
    fit,
    init_params,
    project_orthonormal,
    softplus,
    softplus_inverse,
)
from .reparam import params_to_raw, raw_to_params
from .rff import (
    CovarianceParams,
    RFFBasis,
    covariance_matrix,
    embed,
    gaussian_kernel_exact,
    kernel_approx,
    sample_basis,
)
from .simulator import SimConfig, estimate_lambda_bar, sample_type, simulate, uniform_anchors

__version__ = "0.1.0"
