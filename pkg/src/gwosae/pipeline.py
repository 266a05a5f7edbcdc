"""Stacked sparse-autoencoder classifier trained layerwise by a metaheuristic.

Training runs three stages.  Stage 1 minimizes the first autoencoder's cost
on the (min-max normalized) inputs; stage 2 re-encodes the inputs through
the trained first encoder and minimizes the second autoencoder's cost on
those features; stage 3 fits a softmax layer on the second encoder's
features, either with the same configured metaheuristic (default) or with
plain batch gradient descent.  Prediction is encoder-only: normalize,
encode twice, softmax, argmax (ties to the lowest class index).

Each stage gets its own seed derived from the master seed, so whole runs
are reproducible from a single integer.
"""

from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .autoencoder import AutoencoderParams, AutoencoderSpec, encode, objective, unflatten
from .core import Matrix, derive_seed
from .errors import ConfigError, ParseError, ShapeError, TrainingError
from .optimizers import OptimizerConfig, RunTrace, SearchSpace, run

# Weights, biases and control parameters are initialized and searched in
# this box by default.
DEFAULT_SEARCH_BOX = (-20.0, 20.0)

MODEL_FORMAT_VERSION = 1
MODEL_KIND = "gwosae-model"

SOFTMAX_TRAINERS = ("metaheuristic", "gradient")
STAGES = ("ae1", "ae2", "softmax")


@dataclass(frozen=True)
class PipelineSpec:
    """Architecture and training settings for the stacked classifier."""

    layer_dims: tuple[int, int, int, int]  # input, hidden1, hidden2, n_classes
    optimizer_cfg: OptimizerConfig = field(default_factory=OptimizerConfig)
    rho: float = 0.05
    lambda_bounds: tuple[float, float] = (0.0, 1.0)
    beta_bounds: tuple[float, float] = (0.0, 10.0)
    softmax_trainer: str = "metaheuristic"
    gradient_lr: float = 0.5
    search_box: tuple[float, float] = DEFAULT_SEARCH_BOX

    def __post_init__(self):
        object.__setattr__(self, "layer_dims", tuple(int(d) for d in self.layer_dims))
        dims = self.layer_dims
        if len(dims) != 4:
            raise ConfigError(f"layer_dims needs exactly 4 entries, got {len(dims)}")
        if any(d < 1 for d in dims):
            raise ConfigError(f"all layer dims must be >= 1, got {dims}")
        if dims[3] < 2:
            raise ConfigError(f"need at least 2 classes, got {dims[3]}")
        if self.softmax_trainer not in SOFTMAX_TRAINERS:
            raise ConfigError(
                f"softmax_trainer must be one of {SOFTMAX_TRAINERS}, got {self.softmax_trainer!r}"
            )
        if self.gradient_lr <= 0:
            raise ConfigError(f"gradient_lr must be > 0, got {self.gradient_lr}")
        if not self.search_box[0] < self.search_box[1]:
            raise ConfigError(f"search_box must satisfy lo < hi, got {self.search_box}")
        if dims[1] > dims[0] or dims[2] > dims[1]:
            warnings.warn(
                f"encoder stack expands ({dims[0]}-{dims[1]}-{dims[2]}); feature "
                f"reduction is the usual intent",
                stacklevel=2,
            )

    def ae_spec(self, stage: int) -> AutoencoderSpec:
        """AutoencoderSpec for stage 1 or 2."""
        if stage not in (1, 2):
            raise ConfigError(f"autoencoder stages are 1 and 2, got {stage}")
        return AutoencoderSpec(
            input_dim=self.layer_dims[stage - 1],
            hidden_dim=self.layer_dims[stage],
            rho=self.rho,
            lambda_bounds=self.lambda_bounds,
            beta_bounds=self.beta_bounds,
        )


@dataclass
class TrainedPipeline:
    """Immutable after construction; safe to share across threads for predict."""

    spec: PipelineSpec
    encoder1: AutoencoderParams
    encoder2: AutoencoderParams
    softmax_w: Matrix  # n_classes x hidden2
    softmax_b: np.ndarray  # n_classes
    feature_min: np.ndarray
    feature_max: np.ndarray
    label_map: list[str]


@dataclass
class TrainingReport:
    ae1_trace: RunTrace
    ae2_trace: RunTrace
    softmax_trace: RunTrace
    total_wall_time: float

    def trace(self, stage: str) -> RunTrace:
        return {"ae1": self.ae1_trace, "ae2": self.ae2_trace, "softmax": self.softmax_trace}[stage]


def _normalize(x: Matrix, lo: np.ndarray, hi: np.ndarray) -> Matrix:
    span = hi - lo
    span = np.where(span == 0.0, 1.0, span)
    return (x - lo) / span


def _log_softmax(z: Matrix) -> Matrix:
    shifted = z - z.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _softmax_unpack(v: np.ndarray, n_classes: int, n_features: int):
    w = v[: n_classes * n_features].reshape(n_classes, n_features).copy()
    b = v[n_classes * n_features : n_classes * n_features + n_classes].copy()
    return w, b


def _cross_entropy(w: Matrix, b: np.ndarray, feats: Matrix, y: np.ndarray) -> float:
    logp = _log_softmax(feats @ w.T + b)
    return float(-np.mean(logp[np.arange(len(y)), y]))


def _train_softmax_gradient(spec: PipelineSpec, cfg: OptimizerConfig, feats, y) -> RunTrace:
    """Batch gradient descent on the softmax cross-entropy, best-so-far kept."""
    start = time.perf_counter()
    n_classes, n_feat = spec.layer_dims[3], feats.shape[1]
    w = np.zeros((n_classes, n_feat))
    b = np.zeros(n_classes)
    onehot = np.eye(n_classes)[y]
    best_loss = _cross_entropy(w, b, feats, y)
    best_w, best_b = w.copy(), b.copy()
    trace = np.empty(cfg.max_iterations)
    for t in range(cfg.max_iterations):
        p = np.exp(_log_softmax(feats @ w.T + b))
        resid = p - onehot
        w = w - spec.gradient_lr * (resid.T @ feats) / len(y)
        b = b - spec.gradient_lr * resid.mean(axis=0)
        loss = _cross_entropy(w, b, feats, y)
        if loss < best_loss:
            best_loss = loss
            best_w, best_b = w.copy(), b.copy()
        trace[t] = best_loss
    return RunTrace(
        best_fitness_per_iteration=trace,
        best_position=np.concatenate([best_w.ravel(), best_b]),
        wall_time=time.perf_counter() - start,
        evaluations=cfg.max_iterations + 1,
    )


def train(
    spec: PipelineSpec,
    x_train: Matrix,
    y_train,
    master_seed: int,
    label_map: list[str] | None = None,
) -> tuple[TrainedPipeline, TrainingReport]:
    """Train both autoencoders and the softmax layer; returns model and traces."""
    start = time.perf_counter()
    x = np.asarray(x_train, dtype=np.float64)
    y = np.asarray(y_train, dtype=np.int64)
    dims = spec.layer_dims
    if x.ndim != 2 or x.shape[1] != dims[0]:
        raise ShapeError(f"training data must be N x {dims[0]}, got {x.shape}")
    if y.shape != (x.shape[0],):
        raise ShapeError(f"labels length {y.shape} does not match {x.shape[0]} samples")
    present = np.unique(y)
    if present.size < 2:
        raise TrainingError("training needs at least two distinct classes")
    if y.min() < 0 or y.max() >= dims[3]:
        raise TrainingError(f"labels must lie in [0, {dims[3]}), got range [{y.min()}, {y.max()}]")
    if present.size != dims[3]:
        missing = sorted(set(range(dims[3])) - set(present.tolist()))
        raise TrainingError(f"every class must appear in training data; missing {missing}")
    if label_map is None:
        label_map = [str(c) for c in range(dims[3])]
    if len(label_map) != dims[3]:
        raise ConfigError(f"label_map has {len(label_map)} names for {dims[3]} classes")

    lo, hi = x.min(axis=0), x.max(axis=0)
    x_norm = _normalize(x, lo, hi)
    box = SearchSpace(dim=1, lo=spec.search_box[0], hi=spec.search_box[1])

    def stage_cfg(stage: int) -> OptimizerConfig:
        return replace(spec.optimizer_cfg, seed=derive_seed(master_seed, stage))

    # Stage 1: first autoencoder on normalized inputs.
    ae1_spec = spec.ae_spec(1)
    ae1_trace = run(
        replace(box, dim=ae1_spec.n_params), stage_cfg(1), objective(ae1_spec, x_norm)
    )
    encoder1 = unflatten(ae1_spec, ae1_trace.best_position)
    feats1 = encode(encoder1, x_norm)

    # Stage 2: second autoencoder on the first encoder's features.
    ae2_spec = spec.ae_spec(2)
    ae2_trace = run(
        replace(box, dim=ae2_spec.n_params), stage_cfg(2), objective(ae2_spec, feats1)
    )
    encoder2 = unflatten(ae2_spec, ae2_trace.best_position)
    feats2 = encode(encoder2, feats1)

    # Stage 3: softmax on the second encoder's features.
    n_classes = dims[3]
    if spec.softmax_trainer == "gradient":
        softmax_trace = _train_softmax_gradient(spec, stage_cfg(3), feats2, y)
    else:
        feats2_frozen = feats2.copy()

        def ce(v: np.ndarray) -> float:
            w, b = _softmax_unpack(v, n_classes, dims[2])
            return _cross_entropy(w, b, feats2_frozen, y)

        softmax_trace = run(
            replace(box, dim=n_classes * dims[2] + n_classes), stage_cfg(3), ce
        )
    softmax_w, softmax_b = _softmax_unpack(softmax_trace.best_position, n_classes, dims[2])

    model = TrainedPipeline(
        spec=spec,
        encoder1=encoder1,
        encoder2=encoder2,
        softmax_w=softmax_w,
        softmax_b=softmax_b,
        feature_min=lo.copy(),
        feature_max=hi.copy(),
        label_map=list(label_map),
    )
    report = TrainingReport(
        ae1_trace=ae1_trace,
        ae2_trace=ae2_trace,
        softmax_trace=softmax_trace,
        total_wall_time=time.perf_counter() - start,
    )
    return model, report


def predict(model: TrainedPipeline, x: Matrix) -> tuple[np.ndarray, Matrix]:
    """Class indices and per-class probabilities for each row of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    n_in = model.feature_min.shape[0]
    if x.ndim != 2 or x.shape[1] != n_in:
        raise ShapeError(f"predict expects N x {n_in} input, got {x.shape}")
    x_norm = _normalize(x, model.feature_min, model.feature_max)
    feats = encode(model.encoder2, encode(model.encoder1, x_norm))
    probs = np.exp(_log_softmax(feats @ model.softmax_w.T + model.softmax_b))
    return probs.argmax(axis=1), probs


def accuracy(y_true, y_pred) -> float:
    """Fraction of correct predictions; (TP+TN)/(TP+TN+FN+FP) in the binary case."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ConfigError(f"label vectors must match, got {y_true.shape} vs {y_pred.shape}")
    if y_true.size == 0:
        raise ConfigError("accuracy of empty label vectors is undefined")
    return float(np.mean(y_true == y_pred))


def confusion_matrix(y_true, y_pred, n_classes: int | None = None) -> Matrix:
    """Counts matrix: entry [i, j] is how often true class i was predicted as j."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1 or y_true.size == 0:
        raise ConfigError("confusion matrix needs two equal-length non-empty label vectors")
    if n_classes is None:
        n_classes = int(max(y_true.max(), y_pred.max())) + 1
    if y_true.min() < 0 or y_pred.min() < 0 or max(y_true.max(), y_pred.max()) >= n_classes:
        raise ConfigError(f"labels out of range for {n_classes} classes")
    cm = np.zeros((n_classes, n_classes))
    np.add.at(cm, (y_true, y_pred), 1.0)
    return cm


def _params_to_json(p: AutoencoderParams) -> dict:
    return {
        "w_enc": p.w_enc.tolist(),
        "b_enc": p.b_enc.tolist(),
        "w_dec": p.w_dec.tolist(),
        "b_dec": p.b_dec.tolist(),
        "lambda": p.lam,
        "beta": p.beta,
    }


def _params_from_json(d: dict) -> AutoencoderParams:
    return AutoencoderParams(
        w_enc=np.asarray(d["w_enc"], dtype=np.float64),
        b_enc=np.asarray(d["b_enc"], dtype=np.float64),
        w_dec=np.asarray(d["w_dec"], dtype=np.float64),
        b_dec=np.asarray(d["b_dec"], dtype=np.float64),
        lam=float(d["lambda"]),
        beta=float(d["beta"]),
    )


def save_model(model: TrainedPipeline, path) -> None:
    """Persist as versioned JSON; floats use shortest round-trip text, so a
    save/load cycle reproduces the model bit-exactly."""
    spec = model.spec
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": MODEL_KIND,
        "spec": {
            "layer_dims": list(spec.layer_dims),
            "rho": spec.rho,
            "lambda_bounds": list(spec.lambda_bounds),
            "beta_bounds": list(spec.beta_bounds),
            "softmax_trainer": spec.softmax_trainer,
            "gradient_lr": spec.gradient_lr,
            "search_box": list(spec.search_box),
            "optimizer": {
                "algorithm": spec.optimizer_cfg.algorithm,
                "population_size": spec.optimizer_cfg.population_size,
                "max_iterations": spec.optimizer_cfg.max_iterations,
                "seed": spec.optimizer_cfg.seed,
                "algorithm_params": dict(spec.optimizer_cfg.algorithm_params),
            },
        },
        "encoder1": _params_to_json(model.encoder1),
        "encoder2": _params_to_json(model.encoder2),
        "softmax_w": model.softmax_w.tolist(),
        "softmax_b": model.softmax_b.tolist(),
        "feature_min": model.feature_min.tolist(),
        "feature_max": model.feature_max.tolist(),
        "label_map": list(model.label_map),
    }
    Path(path).write_text(json.dumps(doc, separators=(",", ":")) + "\n", encoding="utf-8")


def load_model(path) -> TrainedPipeline:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: cannot read model file ({exc})") from None
    try:
        if doc.get("kind") != MODEL_KIND:
            raise ParseError(f"{path}: not a {MODEL_KIND} file")
        if doc.get("format_version") != MODEL_FORMAT_VERSION:
            raise ParseError(
                f"{path}: unsupported format_version {doc.get('format_version')}"
            )
        s = doc["spec"]
        opt = s["optimizer"]
        spec = PipelineSpec(
            layer_dims=tuple(s["layer_dims"]),
            optimizer_cfg=OptimizerConfig(
                population_size=opt["population_size"],
                max_iterations=opt["max_iterations"],
                seed=opt["seed"],
                algorithm=opt["algorithm"],
                algorithm_params=dict(opt["algorithm_params"]),
            ),
            rho=s["rho"],
            lambda_bounds=tuple(s["lambda_bounds"]),
            beta_bounds=tuple(s["beta_bounds"]),
            softmax_trainer=s["softmax_trainer"],
            gradient_lr=s["gradient_lr"],
            search_box=tuple(s["search_box"]),
        )
        return TrainedPipeline(
            spec=spec,
            encoder1=_params_from_json(doc["encoder1"]),
            encoder2=_params_from_json(doc["encoder2"]),
            softmax_w=np.asarray(doc["softmax_w"], dtype=np.float64),
            softmax_b=np.asarray(doc["softmax_b"], dtype=np.float64),
            feature_min=np.asarray(doc["feature_min"], dtype=np.float64),
            feature_max=np.asarray(doc["feature_max"], dtype=np.float64),
            label_map=list(doc["label_map"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: corrupted model file ({exc})") from None
