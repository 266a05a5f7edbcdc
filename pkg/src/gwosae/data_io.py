"""Dataset ingestion, stratified splitting and synthetic surrogate generation.

CSV files carry numeric feature columns plus one label column (default: the
last).  The delimiter is auto-detected on the first line among comma,
semicolon and tab: the candidate with the most occurrences wins, ties broken
in that precedence order.  Label values map to class indices in order of
first appearance.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Matrix, Rng
from .errors import ConfigError, ParseError, StratificationError

_DELIMITERS = (",", ";", "\t")

# Within-class standard deviation of the synthetic blobs; class-mean spacing
# is expressed in units of this sigma.
SYNTH_SIGMA = 1.0


@dataclass
class Dataset:
    """Feature matrix, integer labels and the label-name mapping."""

    features: Matrix  # N x F
    labels: np.ndarray  # N, class indices into label_map
    label_map: list[str]
    name: str = ""

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.features.shape[0] < 1 or self.features.shape[1] < 1:
            raise ConfigError(f"dataset needs an N x F matrix with N,F >= 1, got {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise ConfigError(
                f"labels length {self.labels.shape} does not match {self.features.shape[0]} samples"
            )
        if len(self.label_map) == 0 or self.labels.min() < 0 or self.labels.max() >= len(self.label_map):
            raise ConfigError("labels must index into label_map")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.label_map)


@dataclass
class SplitDataset:
    train: Dataset
    test: Dataset
    train_fraction: float


def _detect_delimiter(line: str) -> str:
    counts = [(line.count(d), -i) for i, d in enumerate(_DELIMITERS)]
    best = max(range(len(_DELIMITERS)), key=lambda i: counts[i])
    return _DELIMITERS[best]


def load_csv(path, label_column=-1, has_header: bool = True) -> Dataset:
    """Load a delimiter-separated dataset with one label column.

    ``label_column`` is a column index (negative allowed, default last) or,
    when the file has a header, a column name.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip() != ""]
    if not lines:
        raise ParseError(f"{path}: file is empty")
    delim = _detect_delimiter(lines[0])
    rows = list(csv.reader(lines, delimiter=delim))

    header = None
    data_start = 0
    if has_header:
        header = [c.strip() for c in rows[0]]
        data_start = 1
    if len(rows) <= data_start:
        raise ParseError(f"{path}: no data rows")

    n_cols = len(rows[data_start])
    if n_cols < 2:
        raise ParseError(f"{path}: need at least one feature column plus a label column")

    if isinstance(label_column, str):
        if header is None:
            raise ConfigError("label column given by name but the file has no header")
        try:
            label_idx = header.index(label_column)
        except ValueError:
            raise ConfigError(f"label column {label_column!r} not in header {header}") from None
    else:
        label_idx = int(label_column)
        if label_idx < 0:
            label_idx += n_cols
        if not 0 <= label_idx < n_cols:
            raise ConfigError(f"label column index {label_column} out of range for {n_cols} columns")

    feature_cols = [j for j in range(n_cols) if j != label_idx]
    features = np.empty((len(rows) - data_start, len(feature_cols)))
    label_names: list[str] = []
    label_index: dict[str, int] = {}
    labels = np.empty(len(rows) - data_start, dtype=np.int64)

    for r, row in enumerate(rows[data_start:]):
        rownum = r + data_start + 1  # 1-based, counting the header
        if len(row) != n_cols:
            raise ParseError(f"{path}: row {rownum} has {len(row)} columns, expected {n_cols}")
        for fj, j in enumerate(feature_cols):
            cell = row[j].strip()
            if cell == "":
                raise ParseError(f"{path}: missing value at row {rownum}, column {j + 1}")
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: non-numeric feature {cell!r} at row {rownum}, column {j + 1}"
                ) from None
            if not math.isfinite(value):
                raise ParseError(f"{path}: non-finite feature at row {rownum}, column {j + 1}")
            features[r, fj] = value
        label = row[label_idx].strip()
        if label == "":
            raise ParseError(f"{path}: missing label at row {rownum}")
        if label not in label_index:
            label_index[label] = len(label_names)
            label_names.append(label)
        labels[r] = label_index[label]

    return Dataset(features=features, labels=labels, label_map=label_names, name=path.stem)


def save_csv(ds: Dataset, path) -> None:
    """Write a dataset as comma-separated text: f0..f{F-1} columns, label last.

    Floats are written with ``repr`` so a reload reproduces them bit-exactly.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join([f"f{j}" for j in range(ds.n_features)] + ["label"]) + "\n")
        for i in range(ds.n_samples):
            cells = [repr(float(v)) for v in ds.features[i]]
            cells.append(ds.label_map[ds.labels[i]])
            fh.write(",".join(cells) + "\n")


def validate_shape(ds: Dataset, features: int, instances: int, classes: int) -> None:
    """Check the dataset against declared (features, instances, classes)."""
    actual = (ds.n_features, ds.n_samples, ds.n_classes)
    if actual != (features, instances, classes):
        raise ConfigError(
            f"dataset shape mismatch: expected features={features}, instances={instances}, "
            f"classes={classes}; got features={actual[0]}, instances={actual[1]}, classes={actual[2]}"
        )


def split(ds: Dataset, train_fraction: float, seed: int) -> SplitDataset:
    """Stratified train/test split.

    Per class, round(fraction * class_count) samples go to train, halves
    rounding up (leftovers land in train); membership is shuffled by seed.
    Row order within each side preserves the parent's order.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    rng = Rng(seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for c in range(ds.n_classes):
        members = np.flatnonzero(ds.labels == c)
        if members.size == 0:
            continue
        n_train = int(math.floor(train_fraction * members.size + 0.5))
        if n_train == 0:
            raise StratificationError(
                f"class {ds.label_map[c]!r} ({members.size} samples) gets no training "
                f"samples at fraction {train_fraction}"
            )
        perm = members[rng.permutation(members.size)]
        train_idx.extend(perm[:n_train].tolist())
        test_idx.extend(perm[n_train:].tolist())
    train_idx.sort()
    test_idx.sort()
    if not test_idx:
        raise StratificationError(f"train_fraction {train_fraction} leaves an empty test set")

    def take(idx, tag):
        return Dataset(
            features=ds.features[idx].copy(),
            labels=ds.labels[idx].copy(),
            label_map=list(ds.label_map),
            name=f"{ds.name}[{tag}]" if ds.name else tag,
        )

    return SplitDataset(take(train_idx, "train"), take(test_idx, "test"), train_fraction)


def make_synthetic(
    n_samples: int, n_features: int, n_classes: int, separation: float, seed: int
) -> Dataset:
    """Gaussian blobs with controlled class-mean spacing.

    Class means are drawn uniformly in [0, 1]^F, then rescaled about their
    centroid so the minimum pairwise distance equals separation * sigma
    (sigma = within-class standard deviation).  separation 0 collapses all
    means onto one point.  Classes are balanced to within one sample, labels
    assigned round-robin.
    """
    if n_classes < 1 or n_samples < n_classes:
        raise ConfigError(
            f"need n_samples >= n_classes >= 1, got {n_samples} samples, {n_classes} classes"
        )
    if separation < 0:
        raise ConfigError(f"separation must be >= 0, got {separation}")
    rng = Rng(seed)
    means = rng.uniform(0.0, 1.0, n_classes * n_features).reshape(n_classes, n_features)
    if n_classes >= 2:
        d_min = min(
            float(np.linalg.norm(means[a] - means[b]))
            for a in range(n_classes)
            for b in range(a + 1, n_classes)
        )
        if d_min > 0:
            centroid = means.mean(axis=0)
            means = centroid + (means - centroid) * (separation * SYNTH_SIGMA / d_min)
    labels = np.arange(n_samples, dtype=np.int64) % n_classes
    noise = rng.normal((n_samples, n_features))
    features = means[labels] + SYNTH_SIGMA * noise
    return Dataset(
        features=features,
        labels=labels,
        label_map=[f"class_{c}" for c in range(n_classes)],
        name="synthetic",
    )
