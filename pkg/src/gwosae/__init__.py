"""Derivative-free training of stacked sparse autoencoders.

Grey Wolf Optimizer as the primary trainer, with PSO, GA and ABC baselines,
a stacked autoencoder + softmax classification pipeline, dataset tooling,
and a seeded experiment harness for accuracy/runtime comparisons.
"""

from .autoencoder import (
    AutoencoderParams,
    AutoencoderSpec,
    cost,
    decode,
    encode,
    flatten,
    kl_term,
    l2_penalty,
    objective,
    sparsity_penalty,
    unflatten,
)
from .core import Rng, derive_seed, matmul, sigmoid, uniform_in
from .data_io import Dataset, SplitDataset, load_csv, make_synthetic, save_csv, split
from .errors import (
    ConfigError,
    GwosaeError,
    ParseError,
    ShapeError,
    StratificationError,
    TrainingError,
)
from .experiments import (
    ExperimentPlan,
    ExperimentResult,
    FileSource,
    SyntheticSource,
    emit_curves,
    emit_report,
    run_experiment,
)
from .optimizers import (
    ALGORITHMS,
    GwoState,
    OptimizerConfig,
    RunTrace,
    SearchSpace,
    Wolf,
    gwo_init,
    gwo_step,
    run,
    run_baseline,
)
from .pipeline import (
    PipelineSpec,
    TrainedPipeline,
    TrainingReport,
    accuracy,
    confusion_matrix,
    load_model,
    predict,
    save_model,
    train,
)

__version__ = "0.1.0"
