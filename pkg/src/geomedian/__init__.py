"""Streaming geometric median estimation with non-asymptotic confidence
balls and a Monte Carlo validation harness."""

__version__ = "0.1.0"

from .bounds import (
    BernsteinParams,
    ConfidenceBall,
    averaged_ball,
    averaged_radius,
    bernstein_tail,
    n_delta,
    rm_ball,
    rm_radius_shape,
    tail_inversion,
)
from .errors import (
    ConfigError,
    DataError,
    DimensionMismatchError,
    GeomedianError,
    InputOutputError,
    NumericalError,
    SingularPointError,
)
from .estimator import (
    MartingaleIncrement,
    MedianEstimator,
    Snapshot,
    StepSchedule,
    run_stream,
)
from .experiments import (
    AgreementResult,
    ExperimentConfig,
    ExperimentReport,
    TailScenario,
    calibrate_rm_constant,
    coverage_experiment,
    default_tail_scenarios,
    estimator_agreement,
    martingale_tail_experiment,
    rate_experiment,
    resolve_median,
)
from .hilbert import (
    DistributionSpec,
    as_vector,
    inner,
    known_median,
    norm,
    sample,
    substream,
)
from .oracle import (
    HessianEstimate,
    WeiszfeldResult,
    as_sample,
    gradient,
    hessian,
    lambda_min_estimate,
    linearization_residual,
    objective,
    weiszfeld,
)

__all__ = [
    "__version__",
    "AgreementResult",
    "BernsteinParams",
    "ConfidenceBall",
    "ConfigError",
    "DataError",
    "DimensionMismatchError",
    "DistributionSpec",
    "ExperimentConfig",
    "ExperimentReport",
    "GeomedianError",
    "HessianEstimate",
    "InputOutputError",
    "MartingaleIncrement",
    "MedianEstimator",
    "NumericalError",
    "SingularPointError",
    "Snapshot",
    "StepSchedule",
    "TailScenario",
    "WeiszfeldResult",
    "as_sample",
    "as_vector",
    "averaged_ball",
    "averaged_radius",
    "bernstein_tail",
    "calibrate_rm_constant",
    "coverage_experiment",
    "default_tail_scenarios",
    "estimator_agreement",
    "gradient",
    "hessian",
    "inner",
    "known_median",
    "lambda_min_estimate",
    "linearization_residual",
    "martingale_tail_experiment",
    "n_delta",
    "norm",
    "objective",
    "rate_experiment",
    "resolve_median",
    "rm_ball",
    "rm_radius_shape",
    "run_stream",
    "sample",
    "substream",
    "tail_inversion",
    "weiszfeld",
]
