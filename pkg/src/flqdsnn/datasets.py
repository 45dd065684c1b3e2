"""Dataset loading and preprocessing.

Three benchmark tables ship as CSV fixtures under `flqdsnn/data/` (see the
README for provenance); arbitrary CSVs load through the same parser.  The
preprocessing pipeline is: stratified 80/20 split, then PCA down to 4
features when there are more than 4 (fit on the training split only), then
min-max scaling to [0,1] (again fit on the training split only, test values
clamped).  The circuit encodes exactly 4 features in [0,1], so every
pipeline ends in that shape.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IngestionError, ReductionError, SplitError, UsageError

_DATA_DIR = Path(__file__).parent / "data"

# classes per bundled fixture
BUILTIN_DATASETS = {"iris": 3, "digits": 10, "breast_cancer": 2}


@dataclass
class Dataset:
    """A named feature matrix with integer labels."""

    name: str
    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    split_seed: int | None = None

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.shape[0]:
            raise UsageError(
                f"features {self.features.shape} and labels {self.labels.shape} disagree"
            )
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise UsageError(f"labels must lie in [0, {self.n_classes})")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]


@dataclass
class Scaler:
    """Per-feature min/max from the training split."""

    lo: np.ndarray
    hi: np.ndarray


@dataclass
class PcaReducer:
    """Mean vector and orthonormal top-k principal components (columns)."""

    mean: np.ndarray
    components: np.ndarray

    def transform(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        return (features - self.mean) @ self.components


def fixture_path(name: str) -> Path:
    """Path of a bundled CSV fixture (iris, digits, breast_cancer)."""
    if name not in BUILTIN_DATASETS:
        raise UsageError(f"no bundled dataset named {name!r}; have {sorted(BUILTIN_DATASETS)}")
    return _DATA_DIR / f"{name}.csv"


def load_builtin_iris() -> Dataset:
    """The bundled 150-row, 4-feature, 3-class Iris table; no network involved."""
    return load_csv(fixture_path("iris"), label_column="label", n_classes=3, name="iris")


def load_builtin(name: str) -> Dataset:
    """Load any bundled fixture by name."""
    return load_csv(
        fixture_path(name), label_column="label", n_classes=BUILTIN_DATASETS[name], name=name
    )


def load_csv(
    path: str | Path,
    label_column: str,
    n_classes: int,
    *,
    name: str | None = None,
) -> Dataset:
    """Parse a UTF-8, comma-separated, header-first CSV into a raw Dataset.

    Labels may be integers in [0, n_classes) or category strings, which are
    mapped to indices by sorted order.  Any malformed cell raises an
    ingestion error carrying 1-based row/column coordinates (the header is
    row 1).
    """
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise IngestionError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    if label_column not in header:
        raise IngestionError(f"{path} has no column named {label_column!r}; header {header}")
    label_idx = header.index(label_column)
    feature_idx = [i for i in range(len(header)) if i != label_idx]
    if not feature_idx:
        raise IngestionError(f"{path} has no feature columns besides {label_column!r}")
    if len(rows) == 1:
        raise IngestionError(f"{path} has a header but no data rows")

    features = np.empty((len(rows) - 1, len(feature_idx)))
    raw_labels: list[str] = []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise IngestionError(
                f"{path} row {r}: {len(row)} cells, expected {len(header)} (ragged row)"
            )
        for out_col, c in enumerate(feature_idx):
            cell = row[c].strip()
            try:
                features[r - 2, out_col] = float(cell)
            except ValueError:
                raise IngestionError(
                    f"{path} row {r} column {c + 1} ({header[c]!r}): "
                    f"non-numeric cell {cell!r}"
                ) from None
        raw_labels.append(row[label_idx].strip())

    labels = _parse_labels(raw_labels, n_classes, path, label_idx + 1)
    return Dataset(
        name=name if name is not None else path.stem,
        features=features,
        labels=labels,
        n_classes=n_classes,
    )


def _parse_labels(
    raw: list[str], n_classes: int, path: Path, column: int
) -> np.ndarray:
    try:
        values = np.array([int(cell) for cell in raw], dtype=np.int64)
    except ValueError:
        values = None
    if values is not None:
        bad = np.where((values < 0) | (values >= n_classes))[0]
        if bad.size:
            r = int(bad[0]) + 2
            raise IngestionError(
                f"{path} row {r} column {column}: unknown label {values[bad[0]]}, "
                f"expected [0, {n_classes})"
            )
        return values
    categories = sorted(set(raw))
    if len(categories) > n_classes:
        extra = categories[n_classes:]
        r = raw.index(extra[0]) + 2
        raise IngestionError(
            f"{path} row {r} column {column}: unknown label {extra[0]!r}; "
            f"{len(categories)} categories exceed n_classes={n_classes}"
        )
    mapping = {cat: i for i, cat in enumerate(categories)}
    return np.array([mapping[cell] for cell in raw], dtype=np.int64)


def fit_pca_reduce(train_features: np.ndarray, k: int = 4) -> PcaReducer:
    """Top-k PCA of the training covariance with a deterministic sign.

    Components are ordered by descending eigenvalue; each is flipped so its
    largest-magnitude entry is positive.
    """
    x = np.asarray(train_features, dtype=np.float64)
    if x.ndim != 2:
        raise UsageError(f"train_features must be a matrix, got shape {x.shape}")
    n, d = x.shape
    if d < k:
        raise UsageError(f"cannot reduce {d} features to {k}")
    if n < k + 1:
        raise UsageError(f"need at least {k + 1} training rows, got {n}")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - 1)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1][:k]
    top = eigenvalues[order]
    if top[0] <= 0 or top[-1] <= top[0] * 1e-9:
        raise ReductionError(
            f"training data has rank < {k} (top eigenvalues {top.tolist()})"
        )
    components = eigenvectors[:, order]
    for j in range(k):
        pivot = np.argmax(np.abs(components[:, j]))
        if components[pivot, j] < 0:
            components[:, j] = -components[:, j]
    return PcaReducer(mean=mean, components=components)


def fit_scale(train_features: np.ndarray) -> Scaler:
    """Per-feature min/max statistics, from the training split only."""
    x = np.asarray(train_features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise UsageError(f"need a non-empty training matrix, got shape {x.shape}")
    return Scaler(lo=x.min(axis=0), hi=x.max(axis=0))


def apply_scale(scaler: Scaler, features: np.ndarray) -> np.ndarray:
    """Map to [0,1]: (x-min)/(max-min), constants to 0.5, out-of-range clamped."""
    x = np.asarray(features, dtype=np.float64)
    span = scaler.hi - scaler.lo
    constant = span == 0
    safe_span = np.where(constant, 1.0, span)
    scaled = (x - scaler.lo) / safe_span
    scaled = np.where(constant, 0.5, scaled)
    return np.clip(scaled, 0.0, 1.0)


def train_test_split(
    dataset: Dataset, test_fraction: float = 0.2, seed: int = 0
) -> tuple[Dataset, Dataset]:
    """Stratified split: every class as close to the fraction as integers allow.

    Each class keeps at least one row on each side, so classes with fewer
    than two rows are rejected.  Row order within each side stays ascending.
    """
    if not 0.0 < test_fraction < 1.0:
        raise UsageError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    test_rows: list[np.ndarray] = []
    train_rows: list[np.ndarray] = []
    for cls in np.unique(dataset.labels):
        idx = np.where(dataset.labels == cls)[0]
        if idx.size < 2:
            raise SplitError(f"class {cls} has {idx.size} sample(s); need at least 2")
        n_test = int(np.clip(round(test_fraction * idx.size), 1, idx.size - 1))
        shuffled = rng.permutation(idx)
        test_rows.append(shuffled[:n_test])
        train_rows.append(shuffled[n_test:])
    test_idx = np.sort(np.concatenate(test_rows))
    train_idx = np.sort(np.concatenate(train_rows))

    def subset(rows: np.ndarray) -> Dataset:
        return Dataset(
            name=dataset.name,
            features=dataset.features[rows],
            labels=dataset.labels[rows],
            n_classes=dataset.n_classes,
            split_seed=seed,
        )

    return subset(train_idx), subset(test_idx)


def preprocess_split(
    dataset: Dataset, seed: int = 0, k: int = 4
) -> tuple[Dataset, Dataset]:
    """Split, reduce to k features if wider, and scale to [0,1].

    PCA and scaling statistics come from the training split alone; the test
    split is transformed with them (values clamped into [0,1]).
    """
    train, test = train_test_split(dataset, 0.2, seed)
    train_x, test_x = train.features, test.features
    if train_x.shape[1] > k:
        reducer = fit_pca_reduce(train_x, k)
        train_x, test_x = reducer.transform(train_x), reducer.transform(test_x)
    scaler = fit_scale(train_x)
    train_x, test_x = apply_scale(scaler, train_x), apply_scale(scaler, test_x)

    def rebuild(base: Dataset, x: np.ndarray) -> Dataset:
        return Dataset(
            name=base.name,
            features=x,
            labels=base.labels,
            n_classes=base.n_classes,
            split_seed=base.split_seed,
        )

    return rebuild(train, train_x), rebuild(test, test_x)
