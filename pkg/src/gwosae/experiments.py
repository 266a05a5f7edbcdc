"""Repeated seeded training runs, aggregation, and curve/report emission.

One experiment plan names a dataset source, a pipeline spec, the algorithms
to compare and a repeat count.  Every algorithm runs under the same
population size and iteration budget, and within one repeat every algorithm
sees the same train/test split (split seed = base_seed XOR repeat index),
so accuracy and runtime comparisons are budget- and data-matched.

Outputs: per-(algorithm, repeat, stage) curve CSVs with columns
``iteration,best_cost``, one combined long-format CSV, and a versioned JSON
report (schema in ``REPORT_SCHEMA``) plus a plain-text table.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import derive_seed
from .data_io import Dataset, load_csv, make_synthetic, split
from .errors import ConfigError, GwosaeError
from .optimizers import ALGORITHMS, RunTrace
from .pipeline import STAGES, PipelineSpec, TrainingReport, accuracy, predict, train

REPORT_SCHEMA_VERSION = 1
RESULT_FORMAT_VERSION = 1

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "dataset", "repeats", "train_fraction", "budget", "algorithms"],
    "properties": {
        "schema_version": {"const": REPORT_SCHEMA_VERSION},
        "dataset": {"type": "string"},
        "repeats": {"type": "integer", "minimum": 1},
        "train_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "base_seed": {"type": "integer", "minimum": 0},
        "budget": {
            "type": "object",
            "required": ["population_size", "max_iterations"],
            "properties": {
                "population_size": {"type": "integer", "minimum": 4},
                "max_iterations": {"type": "integer", "minimum": 1},
            },
        },
        "algorithms": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": [
                    "name",
                    "accuracies",
                    "mean_accuracy",
                    "std_accuracy",
                    "mean_accuracy_pct",
                    "std_accuracy_pct",
                    "mean_wall_time_seconds",
                    "wall_times_seconds",
                ],
                "properties": {
                    "name": {"enum": list(ALGORITHMS)},
                    "accuracies": {
                        "type": "array",
                        "minItems": 1,
                        "items": {"type": "number", "minimum": 0, "maximum": 1},
                    },
                    "mean_accuracy": {"type": "number", "minimum": 0, "maximum": 1},
                    "std_accuracy": {"type": "number", "minimum": 0},
                    "mean_accuracy_pct": {"type": "string", "pattern": "^[0-9]+\\.[0-9]{2}$"},
                    "std_accuracy_pct": {"type": "string", "pattern": "^[0-9]+\\.[0-9]{2}$"},
                    "mean_wall_time_seconds": {"type": "number", "minimum": 0},
                    "wall_times_seconds": {"type": "array", "items": {"type": "number"}},
                },
            },
        },
    },
}


@dataclass(frozen=True)
class SyntheticSource:
    n_samples: int
    n_features: int
    n_classes: int
    separation: float
    seed: int


@dataclass(frozen=True)
class FileSource:
    path: str
    label_column: object = -1
    has_header: bool = True


def load_dataset(source) -> Dataset:
    if isinstance(source, Dataset):
        return source
    if isinstance(source, SyntheticSource):
        return make_synthetic(
            source.n_samples, source.n_features, source.n_classes, source.separation, source.seed
        )
    if isinstance(source, FileSource):
        return load_csv(source.path, label_column=source.label_column, has_header=source.has_header)
    raise ConfigError(f"unknown dataset source {type(source).__name__}")


@dataclass(frozen=True)
class ExperimentPlan:
    dataset_source: object
    pipeline_spec: PipelineSpec
    algorithms: tuple[str, ...] = ("gwo",)
    repeats: int = 5
    base_seed: int = 0
    train_fraction: float = 0.7

    def __post_init__(self):
        if self.repeats < 1:
            raise ConfigError(f"repeats must be >= 1, got {self.repeats}")
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {a!r}; valid: {', '.join(ALGORITHMS)}")


@dataclass
class RepeatOutcome:
    test_accuracy: float
    wall_time: float
    report: TrainingReport


@dataclass
class AlgorithmResult:
    algorithm: str
    outcomes: list[RepeatOutcome] = field(default_factory=list)

    @property
    def accuracies(self) -> list[float]:
        return [o.test_accuracy for o in self.outcomes]

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std_accuracy(self) -> float:
        # Population standard deviation: well defined even for a single repeat.
        return float(np.std(self.accuracies))

    @property
    def mean_wall_time(self) -> float:
        return float(np.mean([o.wall_time for o in self.outcomes]))


@dataclass
class ExperimentResult:
    dataset_name: str
    train_fraction: float
    repeats: int
    base_seed: int
    population_size: int
    max_iterations: int
    per_algorithm: list[AlgorithmResult]


def run_experiment(plan: ExperimentPlan) -> ExperimentResult:
    """Train every algorithm for every repeat and collect test accuracies.

    Deterministic given base_seed, except for wall times.
    """
    ds = load_dataset(plan.dataset_source)
    cfg = plan.pipeline_spec.optimizer_cfg
    per_algorithm = []
    for ai, algo in enumerate(plan.algorithms):
        result = AlgorithmResult(algorithm=algo)
        for r in range(plan.repeats):
            try:
                sd = split(ds, plan.train_fraction, seed=plan.base_seed ^ r)
                spec = replace(plan.pipeline_spec, optimizer_cfg=replace(cfg, algorithm=algo))
                master = derive_seed(plan.base_seed, ai + 1, r)
                model, report = train(
                    spec, sd.train.features, sd.train.labels, master, label_map=ds.label_map
                )
                pred, _ = predict(model, sd.test.features)
                acc = accuracy(sd.test.labels, pred)
            except GwosaeError as exc:
                raise type(exc)(f"algorithm {algo!r}, repeat {r}: {exc}") from exc
            result.outcomes.append(
                RepeatOutcome(
                    test_accuracy=acc,
                    wall_time=report.total_wall_time,
                    report=report,
                )
            )
        per_algorithm.append(result)
    return ExperimentResult(
        dataset_name=ds.name,
        train_fraction=plan.train_fraction,
        repeats=plan.repeats,
        base_seed=plan.base_seed,
        population_size=cfg.population_size,
        max_iterations=cfg.max_iterations,
        per_algorithm=per_algorithm,
    )


def write_trace_csv(trace: RunTrace, path) -> None:
    """One curve file: header ``iteration,best_cost`` then one row per iteration."""
    path = Path(path)
    lines = ["iteration,best_cost"]
    for t, c in enumerate(trace.best_fitness_per_iteration, start=1):
        lines.append(f"{t},{float(c)!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def curve_filename(algorithm: str, repeat: int, stage: str) -> str:
    return f"{algorithm}_rep{repeat}_{stage}.csv"


def emit_curves(result: ExperimentResult, out_dir) -> list[Path]:
    """Write per-(algorithm, repeat, stage) curves plus ``curves_long.csv``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    long_lines = ["algorithm,repeat,stage,iteration,best_cost"]
    for ar in result.per_algorithm:
        for r, outcome in enumerate(ar.outcomes):
            for stage in STAGES:
                trace = outcome.report.trace(stage)
                path = out_dir / curve_filename(ar.algorithm, r, stage)
                write_trace_csv(trace, path)
                written.append(path)
                for t, c in enumerate(trace.best_fitness_per_iteration, start=1):
                    long_lines.append(f"{ar.algorithm},{r},{stage},{t},{float(c)!r}")
    long_path = out_dir / "curves_long.csv"
    long_path.write_text("\n".join(long_lines) + "\n", encoding="utf-8")
    written.append(long_path)
    return written


def _pct(x: float) -> str:
    return f"{100.0 * x:.2f}"


def report_dict(result: ExperimentResult) -> dict:
    """The JSON report document (validates against ``REPORT_SCHEMA``).

    Wall-clock values appear only under keys containing ``wall_time``;
    everything else is deterministic for a fixed base seed.
    """
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "dataset": result.dataset_name,
        "repeats": result.repeats,
        "train_fraction": result.train_fraction,
        "base_seed": result.base_seed,
        "budget": {
            "population_size": result.population_size,
            "max_iterations": result.max_iterations,
        },
        "algorithms": [
            {
                "name": ar.algorithm,
                "accuracies": ar.accuracies,
                "mean_accuracy": ar.mean_accuracy,
                "std_accuracy": ar.std_accuracy,
                "mean_accuracy_pct": _pct(ar.mean_accuracy),
                "std_accuracy_pct": _pct(ar.std_accuracy),
                "mean_wall_time_seconds": ar.mean_wall_time,
                "wall_times_seconds": [o.wall_time for o in ar.outcomes],
            }
            for ar in result.per_algorithm
        ],
    }


def report_text(result: ExperimentResult) -> str:
    """Plain-text rendering of the per-algorithm comparison table."""
    header = f"{'algorithm':<10} {'mean acc (%)':>12} {'std (%)':>8} {'mean time (s)':>14}"
    rows = [
        f"dataset: {result.dataset_name}  repeats: {result.repeats}  "
        f"budget: {result.population_size} x {result.max_iterations}",
        header,
        "-" * len(header),
    ]
    for ar in result.per_algorithm:
        rows.append(
            f"{ar.algorithm:<10} {_pct(ar.mean_accuracy):>12} {_pct(ar.std_accuracy):>8} "
            f"{ar.mean_wall_time:>14.2f}"
        )
    return "\n".join(rows) + "\n"


def emit_report(result: ExperimentResult, out_path) -> tuple[Path, Path]:
    """Write the JSON report to ``out_path`` and a text table next to it."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(
        json.dumps(report_dict(result), indent=2, sort_keys=False) + "\n", encoding="utf-8"
    )
    txt_path = out_path.with_suffix(".txt")
    txt_path.write_text(report_text(result), encoding="utf-8")
    return out_path, txt_path


def _trace_to_dict(trace: RunTrace) -> dict:
    return {
        "best_fitness_per_iteration": [float(v) for v in trace.best_fitness_per_iteration],
        "wall_time": trace.wall_time,
        "evaluations": trace.evaluations,
    }


def _trace_from_dict(d: dict) -> RunTrace:
    return RunTrace(
        best_fitness_per_iteration=np.asarray(d["best_fitness_per_iteration"], dtype=np.float64),
        best_position=np.empty(0),
        wall_time=float(d["wall_time"]),
        evaluations=int(d["evaluations"]),
    )


def save_result(result: ExperimentResult, path) -> None:
    """Persist a full result (traces included, best positions omitted) so
    curves and reports can be re-emitted without re-running."""
    doc = {
        "format_version": RESULT_FORMAT_VERSION,
        "dataset": result.dataset_name,
        "train_fraction": result.train_fraction,
        "repeats": result.repeats,
        "base_seed": result.base_seed,
        "population_size": result.population_size,
        "max_iterations": result.max_iterations,
        "algorithms": [
            {
                "name": ar.algorithm,
                "outcomes": [
                    {
                        "test_accuracy": o.test_accuracy,
                        "wall_time": o.wall_time,
                        "total_wall_time": o.report.total_wall_time,
                        "traces": {s: _trace_to_dict(o.report.trace(s)) for s in STAGES},
                    }
                    for o in ar.outcomes
                ],
            }
            for ar in result.per_algorithm
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_result(path) -> ExperimentResult:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: cannot read result file ({exc})") from None
    try:
        if doc.get("format_version") != RESULT_FORMAT_VERSION:
            raise ConfigError(f"{path}: unsupported result format {doc.get('format_version')}")
        per_algorithm = []
        for a in doc["algorithms"]:
            outcomes = []
            for o in a["outcomes"]:
                traces = {s: _trace_from_dict(o["traces"][s]) for s in STAGES}
                outcomes.append(
                    RepeatOutcome(
                        test_accuracy=float(o["test_accuracy"]),
                        wall_time=float(o["wall_time"]),
                        report=TrainingReport(
                            ae1_trace=traces["ae1"],
                            ae2_trace=traces["ae2"],
                            softmax_trace=traces["softmax"],
                            total_wall_time=float(o["total_wall_time"]),
                        ),
                    )
                )
            per_algorithm.append(AlgorithmResult(algorithm=a["name"], outcomes=outcomes))
        return ExperimentResult(
            dataset_name=doc["dataset"],
            train_fraction=float(doc["train_fraction"]),
            repeats=int(doc["repeats"]),
            base_seed=int(doc["base_seed"]),
            population_size=int(doc["population_size"]),
            max_iterations=int(doc["max_iterations"]),
            per_algorithm=per_algorithm,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: corrupted result file ({exc})") from None
