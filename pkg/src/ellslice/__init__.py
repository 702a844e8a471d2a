"""Latent-Gaussian MCMC: elliptical slice sampling, baselines, models,
block updates, chain diagnostics, and a benchmark harness."""

from .blocking import (
    BlockPartition,
    ConditionalGaussian,
    block_update,
    conditional_gaussian,
    contiguous_partitions,
    make_partition,
    random_partition,
)
from .diagnostics import (
    ChainTrace,
    EssReport,
    autocorrelation,
    effective_sample_size,
    summarize,
)
from .errors import (
    ChainError,
    DegenerateSeries,
    DimensionMismatch,
    EllsliceError,
    EventOutOfRange,
    InvalidConfig,
    NonFiniteLikelihood,
    NotPositiveDefinite,
    ShrinkLimitExceeded,
)
from .gaussian import GaussianPrior, check_covariance, factorize, rotate
from .harness import (
    Dataset,
    ExperimentConfig,
    build_dataset,
    build_prior,
    cli_benchmark,
    cli_diagnose,
    cli_generate,
    cli_run,
    cli_tune_mh,
    config_hash,
    load_config,
    load_dataset,
    parse_config,
    read_trace_csv,
    write_trace_csv,
)
from .kernels import KernelConfig, squared_exponential
from .models import (
    CLASSIFICATION_KERNEL,
    ClassificationData,
    ConstantLikelihood,
    CoxData,
    RegressionData,
    bin_events,
    generate_classification_dataset,
    generate_regression_dataset,
    gp_regression_posterior_oracle,
    mining_event_times,
    read_event_times,
)
from .samplers import (
    EllipticalConfig,
    MhConfig,
    SamplerState,
    StepResult,
    chain_rng,
    elliptical_slice_aux_step,
    elliptical_slice_step,
    line_slice_step,
    make_operator,
    neal_mh_step,
    run_chain,
)

__all__ = [
    "BlockPartition",
    "CLASSIFICATION_KERNEL",
    "ChainError",
    "ChainTrace",
    "ClassificationData",
    "ConditionalGaussian",
    "ConstantLikelihood",
    "CoxData",
    "Dataset",
    "DegenerateSeries",
    "DimensionMismatch",
    "EllipticalConfig",
    "EllsliceError",
    "EssReport",
    "EventOutOfRange",
    "ExperimentConfig",
    "GaussianPrior",
    "InvalidConfig",
    "KernelConfig",
    "MhConfig",
    "NonFiniteLikelihood",
    "NotPositiveDefinite",
    "RegressionData",
    "SamplerState",
    "ShrinkLimitExceeded",
    "StepResult",
    "autocorrelation",
    "bin_events",
    "block_update",
    "build_dataset",
    "build_prior",
    "chain_rng",
    "check_covariance",
    "cli_benchmark",
    "cli_diagnose",
    "cli_generate",
    "cli_run",
    "cli_tune_mh",
    "conditional_gaussian",
    "config_hash",
    "contiguous_partitions",
    "effective_sample_size",
    "elliptical_slice_aux_step",
    "elliptical_slice_step",
    "factorize",
    "generate_classification_dataset",
    "generate_regression_dataset",
    "gp_regression_posterior_oracle",
    "line_slice_step",
    "load_config",
    "load_dataset",
    "make_operator",
    "make_partition",
    "mining_event_times",
    "neal_mh_step",
    "parse_config",
    "random_partition",
    "read_event_times",
    "read_trace_csv",
    "rotate",
    "run_chain",
    "squared_exponential",
    "summarize",
    "write_trace_csv",
]

__version__ = "0.1.0"
