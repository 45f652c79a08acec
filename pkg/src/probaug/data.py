"""Dataset ingestion, column typing, and the train-fitted preprocessing chain.

The chain, applied per training split and then to both splits:

1. one-hot encode categorical columns against the training vocabulary,
2. standardize the original numeric columns with training mean/std,
3. standardize the target, shift it positive, and power-transform it.

All statistics come from the training split only; the API makes it
impossible to fit them on anything else.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, DataError

NUMERIC = "numeric"
CATEGORICAL = "categorical"

POSITIVITY_FLOOR = 1e-6
_LAMBDA_GRID = np.round(np.arange(-200, 201)) / 100.0  # [-2, 2] step 0.01, exact


class ClampWarning(UserWarning):
    """Shifted target values at or below zero were clamped to the floor."""


@dataclass(frozen=True)
class Schema:
    """Column-kind declarations for a CSV file."""

    target: str
    kinds: dict[str, str]  # column name -> numeric | categorical | drop

    def __post_init__(self):
        for col, kind in self.kinds.items():
            if kind not in (NUMERIC, CATEGORICAL, "drop"):
                raise ConfigError(f"schema column {col!r} has unknown kind {kind!r}")
        if self.target in self.kinds:
            raise ConfigError(f"target column {self.target!r} also listed under columns")


@dataclass(frozen=True)
class Dataset:
    """A column-typed feature table plus a numeric target.

    Numeric columns are float64 with NaN marking missing cells; categorical
    columns are object arrays of tokens with None marking missing cells.
    """

    name: str
    feature_names: tuple[str, ...]
    column_kinds: tuple[str, ...]
    columns: tuple[np.ndarray, ...] = field(repr=False)
    target: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = len(self.feature_names)
        if len(self.column_kinds) != d or len(self.columns) != d:
            raise DataError("feature names, kinds and columns must align")
        n = self.target.shape[0]
        for name, col in zip(self.feature_names, self.columns):
            if col.shape[0] != n:
                raise DataError(f"column {name!r} length differs from target length")

    @property
    def n_rows(self) -> int:
        return int(self.target.shape[0])

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def missing_mask(self) -> np.ndarray:
        """Boolean mask of rows containing at least one missing cell."""
        mask = np.isnan(self.target)
        for kind, col in zip(self.column_kinds, self.columns):
            if kind == NUMERIC:
                mask = mask | np.isnan(col)
            else:
                mask = mask | np.array([c is None for c in col], dtype=bool)
        return mask

    def take_rows(self, idx: np.ndarray) -> "Dataset":
        return replace(
            self,
            columns=tuple(col[idx] for col in self.columns),
            target=self.target[idx],
        )

    def feature_matrix(self) -> np.ndarray:
        """The n x d float matrix; requires every column to be numeric."""
        if any(k != NUMERIC for k in self.column_kinds):
            raise DataError("feature_matrix needs an all-numeric dataset")
        if not self.columns:
            return np.empty((self.n_rows, 0), dtype=np.float64)
        return np.column_stack([c.astype(np.float64) for c in self.columns])


def dataset_from_arrays(X: np.ndarray, y: np.ndarray, name: str = "array",
                        feature_names: list[str] | None = None) -> Dataset:
    """Wrap a numeric matrix and target vector as a Dataset."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise DataError("X must be 2-D")
    d = X.shape[1]
    names = tuple(feature_names) if feature_names else tuple(f"x{i + 1}" for i in range(d))
    return Dataset(
        name=name,
        feature_names=names,
        column_kinds=(NUMERIC,) * d,
        columns=tuple(X[:, j].copy() for j in range(d)),
        target=y.copy(),
    )


def load_schema(path: str) -> Schema:
    """Read a YAML schema: ``target: <name>`` plus ``columns: {name: kind}``."""
    import yaml

    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"schema file not found: {path}")
    if not isinstance(raw, dict) or "target" not in raw or "columns" not in raw:
        raise ConfigError(f"schema file {path} needs 'target' and 'columns' keys")
    kinds = {str(k): str(v) for k, v in raw["columns"].items()}
    return Schema(target=str(raw["target"]), kinds=kinds)


def _parse_numeric(cell: str) -> float:
    cell = cell.strip()
    if not cell:
        return math.nan
    try:
        return float(cell)
    except ValueError:
        return math.nan


def load_csv(path: str, schema: Schema, name: str | None = None) -> Dataset:
    """Load a comma-separated, UTF-8, headered file against a schema.

    Unparseable or blank numeric cells become missing values; blank
    categorical cells become missing tokens. Row order is preserved.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except FileNotFoundError:
        raise DataError(f"CSV file not found: {path}")
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"CSV file {path} is empty")
        header = [h.strip() for h in header]
        if schema.target not in header:
            raise DataError(f"target column {schema.target!r} not in header of {path}")
        declared = set(schema.kinds) | {schema.target}
        missing_cols = sorted(declared - set(header))
        if missing_cols:
            raise DataError(f"schema columns absent from {path} header: {missing_cols}")
        extra_cols = sorted(set(header) - declared)
        if extra_cols:
            raise DataError(f"header columns not declared in schema: {extra_cols}")

        keep = [(i, h, schema.kinds[h]) for i, h in enumerate(header)
                if h != schema.target and schema.kinds[h] != "drop"]
        target_idx = header.index(schema.target)

        raw_rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
            raw_rows.append(row)

    n = len(raw_rows)
    columns = []
    for i, _h, kind in keep:
        if kind == NUMERIC:
            col = np.array([_parse_numeric(r[i]) for r in raw_rows], dtype=np.float64)
        else:
            col = np.array(
                [r[i].strip() if r[i].strip() else None for r in raw_rows], dtype=object
            )
        columns.append(col)
    target = np.array([_parse_numeric(r[target_idx]) for r in raw_rows], dtype=np.float64)

    return Dataset(
        name=name if name is not None else path,
        feature_names=tuple(h for _i, h, _k in keep),
        column_kinds=tuple(k for _i, _h, k in keep),
        columns=tuple(columns),
        target=target,
    )


def drop_missing_rows(ds: Dataset) -> Dataset:
    """Keep exactly the rows with zero missing cells, in original order."""
    mask = ds.missing_mask()
    if mask.all():
        raise DataError(f"dataset {ds.name!r} has no complete rows")
    if not mask.any():
        return ds
    return ds.take_rows(np.flatnonzero(~mask))


@dataclass(frozen=True)
class PreprocessStats:
    """Training-split statistics driving the preprocessing chain."""

    feature_means: dict[str, float]
    feature_stds: dict[str, float]
    dropped_columns: tuple[str, ...]
    vocabularies: dict[str, tuple[str, ...]]
    target_mean: float
    target_std: float
    boxcox_shift: float
    boxcox_lambda: float


def boxcox_transform(z: np.ndarray, lam: float) -> np.ndarray:
    """Power transform (z**lam - 1)/lam, or ln(z) at lam = 0; z must be > 0."""
    z = np.asarray(z, dtype=np.float64)
    if lam == 0.0:
        return np.log(z)
    return (np.power(z, lam) - 1.0) / lam


def _boxcox_loglik(z: np.ndarray, lam: float) -> float:
    """Profile log-likelihood of the power transform at a fixed exponent."""
    bc = boxcox_transform(z, lam)
    var = float(np.mean((bc - bc.mean()) ** 2))
    if var <= 0.0:
        return -math.inf
    n = z.size
    return float((lam - 1.0) * np.sum(np.log(z)) - 0.5 * n * math.log(var))


def fit_boxcox_lambda(z: np.ndarray, grid: np.ndarray = _LAMBDA_GRID) -> float:
    """Grid argmax of the power-transform log-likelihood; ties keep the
    smallest exponent. Row-order invariant (sums only)."""
    best_lam = float(grid[0])
    best_ll = -math.inf
    for lam in grid:
        ll = _boxcox_loglik(z, float(lam))
        if ll > best_ll:
            best_ll = ll
            best_lam = float(lam)
    return best_lam


def fit_preprocess(train: Dataset) -> PreprocessStats:
    """Fit all preprocessing statistics on a training split.

    Numeric columns with zero variance are dropped (recorded by name).
    The target shift makes every shifted standardized training value at
    least the positivity floor, so the power transform is defined.
    """
    if train.n_rows < 2:
        raise DataError("fitting preprocessing statistics needs at least 2 rows")
    if train.missing_mask().any():
        raise DataError("fit_preprocess requires a dataset without missing cells")

    means: dict[str, float] = {}
    stds: dict[str, float] = {}
    dropped: list[str] = []
    vocabs: dict[str, tuple[str, ...]] = {}
    for name, kind, col in zip(train.feature_names, train.column_kinds, train.columns):
        if kind == NUMERIC:
            std = float(np.std(col, ddof=1))
            if std <= 0.0:
                dropped.append(name)
            else:
                means[name] = float(np.mean(col))
                stds[name] = std
        else:
            vocabs[name] = tuple(sorted({str(c) for c in col}))

    t_mean = float(np.mean(train.target))
    t_std = float(np.std(train.target, ddof=1))
    if t_std <= 0.0:
        raise DataError("constant target: cannot standardize")

    y_s = (train.target - t_mean) / t_std
    shift = max(0.0, POSITIVITY_FLOOR - float(np.min(y_s)))
    lam = fit_boxcox_lambda(y_s + shift)

    return PreprocessStats(
        feature_means=means,
        feature_stds=stds,
        dropped_columns=tuple(dropped),
        vocabularies=vocabs,
        target_mean=t_mean,
        target_std=t_std,
        boxcox_shift=shift,
        boxcox_lambda=lam,
    )


def one_hot_encode(ds: Dataset, stats: PreprocessStats) -> Dataset:
    """Replace each categorical column by one 0/1 column per training
    category. Tokens outside the training vocabulary encode as all zeros."""
    if not any(k == CATEGORICAL for k in ds.column_kinds):
        return ds
    names: list[str] = []
    kinds: list[str] = []
    columns: list[np.ndarray] = []
    for name, kind, col in zip(ds.feature_names, ds.column_kinds, ds.columns):
        if kind == NUMERIC:
            names.append(name)
            kinds.append(NUMERIC)
            columns.append(col)
            continue
        vocab = stats.vocabularies.get(name)
        if vocab is None:
            raise DataError(f"no fitted vocabulary for categorical column {name!r}")
        tokens = np.array([str(c) for c in col], dtype=object)
        for cat in vocab:
            names.append(f"{name}={cat}")
            kinds.append(NUMERIC)
            columns.append((tokens == cat).astype(np.float64))
    return Dataset(
        name=ds.name,
        feature_names=tuple(names),
        column_kinds=tuple(kinds),
        columns=tuple(columns),
        target=ds.target,
    )


def apply_preprocess(ds: Dataset, stats: PreprocessStats) -> Dataset:
    """Apply train-fitted statistics to a (train or test) split.

    Columns recorded as zero-variance are removed; columns with fitted
    mean/std are standardized; any other numeric column (0/1 dummies) is
    left untouched. The target is standardized, shifted, then
    power-transformed; no inverse transform is ever applied downstream.
    Shifted test values at or below zero are clamped to the positivity
    floor, with a ClampWarning carrying the count.
    """
    if any(k == CATEGORICAL for k in ds.column_kinds):
        raise DataError("apply_preprocess expects an all-numeric dataset; one-hot encode first")

    names: list[str] = []
    columns: list[np.ndarray] = []
    for name, col in zip(ds.feature_names, ds.columns):
        if name in stats.dropped_columns:
            continue
        if name in stats.feature_means:
            col = (col - stats.feature_means[name]) / stats.feature_stds[name]
        names.append(name)
        columns.append(np.asarray(col, dtype=np.float64))

    y_s = (ds.target - stats.target_mean) / stats.target_std
    z = y_s + stats.boxcox_shift
    clamped = int(np.sum(z <= 0.0))
    if clamped:
        warnings.warn(
            f"{clamped} shifted target value(s) at or below zero clamped to "
            f"{POSITIVITY_FLOOR}",
            ClampWarning,
        )
        z = np.maximum(z, POSITIVITY_FLOOR)
    y_t = boxcox_transform(z, stats.boxcox_lambda)

    return Dataset(
        name=ds.name,
        feature_names=tuple(names),
        column_kinds=(NUMERIC,) * len(names),
        columns=tuple(columns),
        target=y_t,
    )


def preprocess(ds: Dataset, stats: PreprocessStats) -> Dataset:
    """One-hot encode, then apply the fitted numeric/target statistics."""
    return apply_preprocess(one_hot_encode(ds, stats), stats)
