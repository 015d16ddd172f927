"""Conditional generative population synthesis on categorical tabular data.

Trains a conditional VAE and a conditional GAN on one-hot encoded agent
records, samples synthetic populations conditioned on property attributes,
and evaluates them against an empirical-distribution baseline with SRMSE,
R-squared, Pearson correlation, and the zero-sample rate.
"""

from .baseline import (
    EmpiricalTable,
    fit_empirical,
    sample_baseline,
    sample_independent_outputs,
    sample_uniform_outputs,
)
from .cgan import (
    CganModel,
    CganTrainConfig,
    discriminator_loss,
    discriminator_scores,
    distinct_output_tuples,
    generator_loss,
    load_cgan,
    sample_cgan,
    save_cgan,
    train_cgan,
)
from .cvae import (
    CvaeModel,
    CvaeTrainConfig,
    cross_entropy,
    cvae_loss,
    kl_divergence,
    load_cvae,
    reparameterize,
    sample_cvae,
    save_cvae,
    train_cvae,
)
from .dataio import read_conditionals, read_dataset, read_schema, write_dataset, write_schema
from .errors import (
    ConfigError,
    DataFormatError,
    EncodingError,
    PopsynError,
    ShapeMismatchError,
    SplitError,
    StateError,
    TrainingDivergedError,
)
from .harness import (
    ExperimentRecord,
    GridSpec,
    run_grid,
    run_protocol,
    run_protocol_suite,
)
from .kernels import BACKEND
from .metrics import (
    DistributionTable,
    EvalReport,
    build_table,
    distribution_suite,
    fold_stats,
    pearson,
    pooled_marginal,
    pooled_marginal_srmse,
    r_squared,
    sample_table,
    srmse,
    zero_sample_pct,
)
from .nn import DenseLayer, Mlp, feedforward
from .optim import RmsProp, rmsprop_step
from .rng import derive_rng, derive_seed, make_rng
from .schema import (
    FeatureSpec,
    Schema,
    build_schema,
    decode_one_hot,
    encode_batch,
    encode_one_hot,
)
from .split import SplitPlan, make_split
from .synthetic import (
    GENERATOR_VERSION,
    default_application_selector,
    generate_dataset,
    true_conditional_distribution,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CganModel",
    "CganTrainConfig",
    "ConfigError",
    "CvaeModel",
    "CvaeTrainConfig",
    "DataFormatError",
    "DenseLayer",
    "DistributionTable",
    "EmpiricalTable",
    "EncodingError",
    "EvalReport",
    "ExperimentRecord",
    "FeatureSpec",
    "GENERATOR_VERSION",
    "GridSpec",
    "Mlp",
    "PopsynError",
    "RmsProp",
    "Schema",
    "ShapeMismatchError",
    "SplitError",
    "SplitPlan",
    "StateError",
    "TrainingDivergedError",
    "build_schema",
    "build_table",
    "cross_entropy",
    "cvae_loss",
    "decode_one_hot",
    "default_application_selector",
    "derive_rng",
    "derive_seed",
    "discriminator_loss",
    "discriminator_scores",
    "distinct_output_tuples",
    "distribution_suite",
    "encode_batch",
    "encode_one_hot",
    "feedforward",
    "fit_empirical",
    "fold_stats",
    "generate_dataset",
    "generator_loss",
    "kl_divergence",
    "load_cgan",
    "load_cvae",
    "make_rng",
    "make_split",
    "pearson",
    "pooled_marginal",
    "pooled_marginal_srmse",
    "r_squared",
    "read_conditionals",
    "read_dataset",
    "read_schema",
    "reparameterize",
    "rmsprop_step",
    "run_grid",
    "run_protocol",
    "run_protocol_suite",
    "sample_baseline",
    "sample_cgan",
    "sample_cvae",
    "sample_independent_outputs",
    "sample_table",
    "sample_uniform_outputs",
    "save_cgan",
    "save_cvae",
    "srmse",
    "train_cgan",
    "train_cvae",
    "true_conditional_distribution",
    "write_dataset",
    "write_schema",
    "zero_sample_pct",
]
