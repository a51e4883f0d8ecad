"""Drift-field construction and discrete-time SDE sampling between distributions."""

from .batch import BatchMeta, SampleBatch, load_batch, save_batch
from .errors import (
    ConfigurationError,
    DegeneracyError,
    DomainError,
    DriftlabError,
    NumericalBlowupError,
    ShapeError,
    UnreliableEstimateWarning,
)
from .gmm import (
    GaussianMixture,
    McEstimate,
    TimeMarginal,
    drift,
    load_mixture,
    log_density,
    mc_conditional_expectation,
    responsibilities,
    save_mixture,
    score,
    time_marginal,
    velocity,
)
from .interpolant import (
    AsymmetricScale,
    BridgeScale,
    Coupling,
    GammaFamily,
    IndependentProduct,
    InterpolantConfig,
    PairedEmpirical,
    gamma_eval,
    gamma_gamma_dot,
    interpolate,
    interpolant_time_derivative,
    sample_interpolant,
)
from .metrics import KnnConfig, gaussian_kl, knn_kl, moment_distance
from .mlp import Adam, Mlp, load_checkpoint, save_checkpoint
from .rng import rng_stream
from .sampler import DriftField, euler_maruyama, gmm_drift_field, initial_batch
from .schedules import (
    TimeGrid,
    asymmetric_grid,
    asymmetric_grid_for_steps,
    exp_decay_grid,
    exp_decay_grid_for_steps,
    uniform_grid,
)
from .training import (
    TrainConfig,
    TrainResult,
    learned_drift_field,
    loss_b,
    loss_s,
    sample_training_time,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "AsymmetricScale",
    "Adam",
    "BatchMeta",
    "BridgeScale",
    "ConfigurationError",
    "Coupling",
    "DegeneracyError",
    "DomainError",
    "DriftField",
    "DriftlabError",
    "GammaFamily",
    "GaussianMixture",
    "IndependentProduct",
    "InterpolantConfig",
    "KnnConfig",
    "McEstimate",
    "Mlp",
    "NumericalBlowupError",
    "PairedEmpirical",
    "SampleBatch",
    "ShapeError",
    "TimeGrid",
    "TimeMarginal",
    "TrainConfig",
    "TrainResult",
    "UnreliableEstimateWarning",
    "asymmetric_grid",
    "asymmetric_grid_for_steps",
    "drift",
    "euler_maruyama",
    "exp_decay_grid",
    "exp_decay_grid_for_steps",
    "gamma_eval",
    "gamma_gamma_dot",
    "gaussian_kl",
    "gmm_drift_field",
    "initial_batch",
    "interpolate",
    "interpolant_time_derivative",
    "knn_kl",
    "learned_drift_field",
    "load_batch",
    "load_checkpoint",
    "load_mixture",
    "log_density",
    "loss_b",
    "loss_s",
    "mc_conditional_expectation",
    "moment_distance",
    "responsibilities",
    "rng_stream",
    "sample_interpolant",
    "sample_training_time",
    "save_batch",
    "save_checkpoint",
    "save_mixture",
    "score",
    "time_marginal",
    "train",
    "uniform_grid",
    "velocity",
]
