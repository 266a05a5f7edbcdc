"""Command-line front door: dataset tooling, training, comparison, emission.

Subcommands: ``train`` (fit one model, write it plus its training curves,
print test accuracy), ``evaluate`` (score a saved model on a CSV, write the
confusion matrix), ``compare`` (run the multi-algorithm experiment harness),
``synth`` (generate a synthetic CSV) and ``curves`` (re-emit curve CSVs from
a saved result file).

Every flag can also be supplied through ``--config file.json`` (keys are the
flag names with dashes as underscores); explicit flags win.  Exit codes:
0 success, 2 usage or validation failure, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .data_io import load_csv, make_synthetic, save_csv, split, validate_shape
from .errors import ConfigError, GwosaeError
from .experiments import (
    ExperimentPlan,
    emit_curves,
    emit_report,
    load_result,
    report_text,
    run_experiment,
    save_result,
    write_trace_csv,
)
from .optimizers import ALGORITHMS, OptimizerConfig
from .pipeline import (
    SOFTMAX_TRAINERS,
    STAGES,
    PipelineSpec,
    accuracy,
    confusion_matrix,
    load_model,
    predict,
    save_model,
    train,
)


def _conv_int(name):
    def conv(raw):
        try:
            return int(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"{name} expects an integer, got {raw!r}") from None

    return conv


def _conv_float(name):
    def conv(raw):
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"{name} expects a number, got {raw!r}") from None

    return conv


def _conv_int_list(name, n, sep=","):
    base = _conv_int(name)

    def conv(raw):
        parts = raw.split(sep) if isinstance(raw, str) else list(raw)
        if len(parts) != n:
            raise ConfigError(f"{name} expects {n} {sep!r}-separated values, got {raw!r}")
        return tuple(base(p) for p in parts)

    return conv


def _conv_bounds(name):
    base = _conv_float(name)

    def conv(raw):
        parts = raw.split(",") if isinstance(raw, str) else list(raw)
        if len(parts) != 2:
            raise ConfigError(f"{name} expects lo,hi, got {raw!r}")
        return (base(parts[0]), base(parts[1]))

    return conv


def _conv_algo(raw):
    algo = str(raw).lower()
    if algo not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {raw!r}; valid: {', '.join(ALGORITHMS)}")
    return algo


def _conv_algos(raw):
    parts = raw.split(",") if isinstance(raw, str) else list(raw)
    if not parts:
        raise ConfigError("--algos needs at least one algorithm")
    return tuple(_conv_algo(p) for p in parts)


def _conv_trainer(raw):
    trainer = str(raw).lower()
    if trainer not in SOFTMAX_TRAINERS:
        raise ConfigError(
            f"unknown softmax trainer {raw!r}; valid: {', '.join(SOFTMAX_TRAINERS)}"
        )
    return trainer


def _conv_label_column(raw):
    if isinstance(raw, int):
        return raw
    s = str(raw)
    try:
        return int(s)
    except ValueError:
        return s


def _conv_algo_params(raw):
    if isinstance(raw, dict):
        return {str(k): float(v) for k, v in raw.items()}
    params = {}
    for item in raw:
        if "=" not in str(item):
            raise ConfigError(f"--algo-param expects KEY=VALUE, got {item!r}")
        key, _, value = str(item).partition("=")
        params[key.strip()] = _conv_float("--algo-param")(value)
    return params


@dataclass(frozen=True)
class Opt:
    name: str
    help: str
    default: object = None
    convert: object = None
    required: bool = False
    flag: bool = False
    repeat: bool = False

    @property
    def dest(self) -> str:
        return self.name.lstrip("-").replace("-", "_")


_DATASET_OPTS = [
    Opt("--data", "path to a CSV dataset (features plus one label column)"),
    Opt("--synth", "synthetic dataset as SAMPLESxFEATURESxCLASSES, e.g. 60x200x2",
        convert=_conv_int_list("--synth", 3, "x")),
    Opt("--separation", "synthetic class-mean spacing in within-class sigmas", 6.0,
        _conv_float("--separation")),
    Opt("--synth-seed", "seed for the synthetic generator (default: --seed)", None,
        _conv_int("--synth-seed")),
    Opt("--label-column", "label column index or (with a header) name; default last", -1,
        _conv_label_column),
    Opt("--no-header", "treat the first CSV line as data, not column names", flag=True),
    Opt("--expect-shape", "validate the dataset against FEATURES,INSTANCES,CLASSES",
        convert=_conv_int_list("--expect-shape", 3)),
]

_PIPELINE_OPTS = [
    Opt("--dims", "layer sizes INPUT,HIDDEN1,HIDDEN2,CLASSES, e.g. 200,50,20,2",
        convert=_conv_int_list("--dims", 4), required=True),
    Opt("--rho", "target mean hidden activation", 0.05, _conv_float("--rho")),
    Opt("--lambda-bounds", "search range lo,hi for the L2 coefficient", (0.0, 1.0),
        _conv_bounds("--lambda-bounds")),
    Opt("--beta-bounds", "search range lo,hi for the sparsity coefficient", (0.0, 10.0),
        _conv_bounds("--beta-bounds")),
    Opt("--softmax-trainer", "softmax stage trainer: metaheuristic or gradient",
        "metaheuristic", _conv_trainer),
    Opt("--gradient-lr", "learning rate for the gradient softmax trainer", 0.5,
        _conv_float("--gradient-lr")),
    Opt("--search-box", "search box lo,hi for weights, biases and coefficients",
        (-20.0, 20.0), _conv_bounds("--search-box")),
    Opt("--pop", "population size", 30, _conv_int("--pop")),
    Opt("--iters", "optimizer iterations per stage", 500, _conv_int("--iters")),
    Opt("--seed", "master seed", 0, _conv_int("--seed")),
    Opt("--train-fraction", "fraction of samples used for training", 0.7,
        _conv_float("--train-fraction")),
    Opt("--algo-param", "per-algorithm parameter KEY=VALUE (repeatable)", {},
        _conv_algo_params, repeat=True),
]

OPTS = {
    "train": _DATASET_OPTS + _PIPELINE_OPTS + [
        Opt("--algo", "optimizer: " + ", ".join(ALGORITHMS), "gwo", _conv_algo),
        Opt("--out-model", "where to write the trained model", "model.json"),
        Opt("--curves-dir", "directory for per-stage training curves", "curves"),
    ],
    "evaluate": [
        Opt("--model", "path to a trained model file", required=True),
        Opt("--data", "path to a CSV dataset", required=True),
        Opt("--label-column", "label column index or name; default last", -1,
            _conv_label_column),
        Opt("--no-header", "treat the first CSV line as data, not column names", flag=True),
        Opt("--expect-shape", "validate the dataset against FEATURES,INSTANCES,CLASSES",
            convert=_conv_int_list("--expect-shape", 3)),
        Opt("--out-confusion", "where to write the confusion matrix CSV", "confusion.csv"),
    ],
    "compare": _DATASET_OPTS + _PIPELINE_OPTS + [
        Opt("--algos", "comma-separated algorithms to compare", ("gwo",), _conv_algos),
        Opt("--repeats", "independent repeats per algorithm", 5, _conv_int("--repeats")),
        Opt("--out", "output directory", "comparison"),
    ],
    "synth": [
        Opt("--samples", "number of samples", required=True, convert=_conv_int("--samples")),
        Opt("--features", "number of features", required=True, convert=_conv_int("--features")),
        Opt("--classes", "number of classes", required=True, convert=_conv_int("--classes")),
        Opt("--separation", "class-mean spacing in within-class sigmas", 6.0,
            _conv_float("--separation")),
        Opt("--seed", "generator seed", 0, _conv_int("--seed")),
        Opt("--out", "where to write the CSV", "synthetic.csv"),
    ],
    "curves": [
        Opt("--result", "result file written by compare", required=True),
        Opt("--out-dir", "directory for the curve CSVs", "curves"),
    ],
}

_COMMAND_HELP = {
    "train": "train one stacked model and report its test accuracy",
    "evaluate": "score a saved model on a dataset",
    "compare": "compare optimizers over repeated seeded runs",
    "synth": "generate a synthetic blob dataset CSV",
    "curves": "re-emit curve CSVs from a saved result file",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gwosae",
        description="Derivative-free stacked sparse-autoencoder training toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command, opts in OPTS.items():
        sp = sub.add_parser(command, help=_COMMAND_HELP[command])
        sp.add_argument("--config", default=None,
                        help="JSON file supplying defaults for any flag (flags win)")
        for o in opts:
            if o.flag:
                sp.add_argument(o.name, dest=o.dest, action="store_const", const=True,
                                default=None, help=o.help)
            elif o.repeat:
                sp.add_argument(o.name, dest=o.dest, action="append", default=None,
                                help=o.help)
            else:
                sp.add_argument(o.name, dest=o.dest, default=None, help=o.help)
    return parser


def _resolve(args: argparse.Namespace) -> dict:
    opts = OPTS[args.command]
    file_cfg = {}
    if args.config is not None:
        try:
            file_cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise ConfigError(f"config file {args.config} must hold a JSON object")
        known = {o.dest for o in opts}
        unknown = sorted(set(file_cfg) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    resolved = {}
    for o in opts:
        raw = getattr(args, o.dest)
        if raw is None:
            raw = file_cfg.get(o.dest)
        if raw is None:
            if o.required:
                raise ConfigError(f"missing required option {o.name}")
            resolved[o.dest] = False if o.flag else o.default
        else:
            resolved[o.dest] = o.convert(raw) if o.convert else raw
    return resolved


def _load_dataset_from_opts(opts: dict):
    has_data = opts.get("data") is not None
    has_synth = opts.get("synth") is not None
    if has_data == has_synth:
        raise ConfigError("exactly one of --data or --synth is required")
    if has_data:
        ds = load_csv(opts["data"], label_column=opts["label_column"],
                      has_header=not opts["no_header"])
    else:
        n, f, c = opts["synth"]
        seed = opts["synth_seed"] if opts["synth_seed"] is not None else opts.get("seed", 0)
        ds = make_synthetic(n, f, c, opts["separation"], seed)
    if opts.get("expect_shape") is not None:
        validate_shape(ds, *opts["expect_shape"])
    return ds


def _optimizer_cfg(opts: dict, algorithm: str) -> OptimizerConfig:
    return OptimizerConfig(
        population_size=opts["pop"],
        max_iterations=opts["iters"],
        seed=opts["seed"],
        algorithm=algorithm,
        algorithm_params=opts["algo_param"],
    )


def _pipeline_spec(opts: dict, algorithm: str) -> PipelineSpec:
    return PipelineSpec(
        layer_dims=opts["dims"],
        optimizer_cfg=_optimizer_cfg(opts, algorithm),
        rho=opts["rho"],
        lambda_bounds=opts["lambda_bounds"],
        beta_bounds=opts["beta_bounds"],
        softmax_trainer=opts["softmax_trainer"],
        gradient_lr=opts["gradient_lr"],
        search_box=opts["search_box"],
    )


def cmd_train(opts: dict) -> int:
    ds = _load_dataset_from_opts(opts)
    if ds.n_features != opts["dims"][0]:
        raise ConfigError(
            f"--dims input size {opts['dims'][0]} does not match dataset features {ds.n_features}"
        )
    if ds.n_classes != opts["dims"][3]:
        raise ConfigError(
            f"--dims class count {opts['dims'][3]} does not match dataset classes {ds.n_classes}"
        )
    spec = _pipeline_spec(opts, opts["algo"])
    sd = split(ds, opts["train_fraction"], seed=opts["seed"])
    model, report = train(
        spec, sd.train.features, sd.train.labels, opts["seed"], label_map=ds.label_map
    )
    save_model(model, opts["out_model"])
    curves_dir = Path(opts["curves_dir"])
    curves_dir.mkdir(parents=True, exist_ok=True)
    for stage in STAGES:
        write_trace_csv(report.trace(stage), curves_dir / f"{stage}.csv")
    pred, _ = predict(model, sd.test.features)
    acc = accuracy(sd.test.labels, pred)
    print(f"test accuracy: {100.0 * acc:.2f}%")
    print(f"model written to {opts['out_model']}; curves in {curves_dir}", file=sys.stderr)
    return 0


def cmd_evaluate(opts: dict) -> int:
    model = load_model(opts["model"])
    ds = load_csv(opts["data"], label_column=opts["label_column"],
                  has_header=not opts["no_header"])
    if opts.get("expect_shape") is not None:
        validate_shape(ds, *opts["expect_shape"])
    n_in = model.feature_min.shape[0]
    if ds.n_features != n_in:
        raise ConfigError(
            f"model expects {n_in} features but dataset has {ds.n_features}"
        )
    try:
        remap = [model.label_map.index(name) for name in ds.label_map]
    except ValueError:
        unknown = sorted(set(ds.label_map) - set(model.label_map))
        raise ConfigError(f"dataset labels not known to the model: {', '.join(unknown)}") from None
    y_true = [remap[c] for c in ds.labels]
    pred, _ = predict(model, ds.features)
    acc = accuracy(y_true, pred)
    cm = confusion_matrix(y_true, pred, n_classes=len(model.label_map))
    out = Path(opts["out_confusion"])
    lines = ["true\\predicted," + ",".join(model.label_map)]
    for i, name in enumerate(model.label_map):
        lines.append(name + "," + ",".join(str(int(v)) for v in cm[i]))
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"accuracy: {100.0 * acc:.2f}%")
    print(f"confusion matrix written to {out}", file=sys.stderr)
    return 0


def cmd_compare(opts: dict) -> int:
    ds = _load_dataset_from_opts(opts)
    spec = _pipeline_spec(opts, opts["algos"][0])
    plan = ExperimentPlan(
        dataset_source=ds,
        pipeline_spec=spec,
        algorithms=opts["algos"],
        repeats=opts["repeats"],
        base_seed=opts["seed"],
        train_fraction=opts["train_fraction"],
    )
    result = run_experiment(plan)
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    emit_report(result, out / "report.json")
    emit_curves(result, out / "curves")
    save_result(result, out / "result.json")
    print(report_text(result), end="")
    print(f"report, curves and result written under {out}", file=sys.stderr)
    return 0


def cmd_synth(opts: dict) -> int:
    ds = make_synthetic(
        opts["samples"], opts["features"], opts["classes"], opts["separation"], opts["seed"]
    )
    save_csv(ds, opts["out"])
    print(f"wrote {ds.n_samples} samples x {ds.n_features} features "
          f"({ds.n_classes} classes) to {opts['out']}")
    return 0


def cmd_curves(opts: dict) -> int:
    result = load_result(opts["result"])
    written = emit_curves(result, opts["out_dir"])
    print(f"wrote {len(written)} curve files to {opts['out_dir']}")
    return 0


_COMMANDS = {
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
    "synth": cmd_synth,
    "curves": cmd_curves,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        opts = _resolve(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](opts)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (GwosaeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
