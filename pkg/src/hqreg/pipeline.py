"""Tabular data pipeline: schema-checked CSV loading, standardisation,
principal components, correlations and a seeded train/test split.

The canonical 506-row housing table ships with the package as a test and demo
fixture; column order is crim, zn, indus, chas, nox, rm, age, dis, rad, tax,
ptratio, b, lstat with target medv (median home value in $1000s).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .exceptions import ContractError, SchemaError

HOUSING_COLUMNS = (
    "crim", "zn", "indus", "chas", "nox", "rm", "age",
    "dis", "rad", "tax", "ptratio", "b", "lstat", "medv",
)
HOUSING_ROWS = 506


@dataclass(frozen=True)
class CsvSchema:
    """Expected columns of a CSV file, with an optional target column."""

    columns: tuple[str, ...]
    target: str | None = None
    expected_rows: int | None = None

    def __post_init__(self) -> None:
        if not self.columns:
            raise ContractError("schema needs at least one column")
        if len(set(self.columns)) != len(self.columns):
            raise ContractError("schema columns must be unique")
        if self.target is not None and self.target not in self.columns:
            raise ContractError(f"target {self.target!r} is not a schema column")


@dataclass
class TabularDataset:
    """Numeric feature matrix plus optional target vector with column names."""

    features: np.ndarray
    targets: np.ndarray | None
    feature_names: tuple[str, ...]
    target_name: str | None = None

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=float)
        if self.features.ndim != 2:
            raise ContractError(f"features must be 2-D, got shape {self.features.shape}")
        if len(self.feature_names) != self.features.shape[1]:
            raise ContractError(
                f"{len(self.feature_names)} names for {self.features.shape[1]} columns"
            )
        if self.targets is not None:
            self.targets = np.asarray(self.targets, dtype=float).reshape(-1)
            if self.targets.size != self.features.shape[0]:
                raise ContractError(
                    f"{self.targets.size} targets for {self.features.shape[0]} rows"
                )

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    def take(self, indices) -> "TabularDataset":
        indices = np.asarray(indices, dtype=int)
        targets = None if self.targets is None else self.targets[indices]
        return TabularDataset(self.features[indices], targets, self.feature_names, self.target_name)


def load_csv(path, schema: CsvSchema) -> TabularDataset:
    """Load a headered CSV against ``schema``.

    Columns are matched by name, so extra columns and reordered headers are
    fine; a missing schema column or an unparseable cell is a SchemaError.  A
    row-count mismatch against ``schema.expected_rows`` only warns.
    """
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"CSV file not found: {path}")
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path} is empty") from None
        positions = {}
        for name in schema.columns:
            if name not in header:
                raise SchemaError(f"column {name!r} missing from {path}")
            positions[name] = header.index(name)
        rows = []
        for line_no, raw in enumerate(reader, start=2):
            if not raw or all(not cell.strip() for cell in raw):
                continue
            if len(raw) != len(header):
                raise SchemaError(
                    f"row {len(rows) + 1} (line {line_no}) has {len(raw)} fields, expected {len(header)}"
                )
            parsed = []
            for name in schema.columns:
                cell = raw[positions[name]].strip()
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise SchemaError(
                        f"cannot parse {cell!r} at row {len(rows) + 1}, column {name!r}"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise SchemaError(f"{path} contains no data rows")
    if schema.expected_rows is not None and len(rows) != schema.expected_rows:
        warnings.warn(
            f"{path} has {len(rows)} rows, expected {schema.expected_rows}",
            stacklevel=2,
        )
    matrix = np.asarray(rows, dtype=float)
    if schema.target is None:
        return TabularDataset(matrix, None, schema.columns)
    t_idx = schema.columns.index(schema.target)
    keep = [i for i in range(len(schema.columns)) if i != t_idx]
    names = tuple(schema.columns[i] for i in keep)
    return TabularDataset(matrix[:, keep], matrix[:, t_idx], names, schema.target)


def load_table(path, target: str | None = None) -> TabularDataset:
    """Load a CSV taking its own header as the schema (all columns numeric)."""
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"CSV file not found: {path}")
    with path.open(newline="") as handle:
        try:
            header = [h.strip() for h in next(csv.reader(handle))]
        except StopIteration:
            raise SchemaError(f"{path} is empty") from None
    if target is not None and target not in header:
        raise SchemaError(f"column {target!r} missing from {path}")
    return load_csv(path, CsvSchema(tuple(header), target=target))


def housing_schema() -> CsvSchema:
    return CsvSchema(HOUSING_COLUMNS, target="medv", expected_rows=HOUSING_ROWS)


def bundled_housing_path() -> Path:
    return Path(__file__).parent / "data" / "boston_housing.csv"


def load_housing() -> TabularDataset:
    """The bundled 506-row housing table (13 features, target medv)."""
    return load_csv(bundled_housing_path(), housing_schema())


class Standardizer(BaseEstimator, TransformerMixin):
    """Column-wise standardisation using population (ddof=0) statistics.

    Fit on the training split and apply to any other matrix so no test
    statistics leak into preprocessing.
    """

    def __init__(self, feature_names=None):
        self.feature_names = feature_names

    def fit(self, X, y=None):
        X = _as_matrix(X)
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        for i, s in enumerate(scale):
            if s == 0.0:
                raise ContractError(f"column {self._name(i)} has zero variance")
        self.mean_ = mean
        self.scale_ = scale
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        self._check_fitted()
        X = _as_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ContractError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        return (X - self.mean_) / self.scale_

    def inverse_transform(self, X):
        self._check_fitted()
        X = _as_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ContractError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        return X * self.scale_ + self.mean_

    def _check_fitted(self):
        if not hasattr(self, "mean_"):
            raise NotFittedError("Standardizer is not fitted")

    def _name(self, i):
        if self.feature_names is not None and i < len(self.feature_names):
            return f"{i} ({self.feature_names[i]})"
        return str(i)


class PrincipalComponents(BaseEstimator, TransformerMixin):
    """PCA via singular value decomposition with a deterministic sign fix.

    Each component row is flipped so its largest-magnitude entry is positive,
    making repeated fits bit-identical.  Variance ratios use the population
    convention to match :class:`Standardizer`.
    """

    def __init__(self, n_components):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = _as_matrix(X)
        n, d = X.shape
        k = self.n_components
        if not 1 <= k <= d:
            raise ContractError(f"n_components must lie in [1, {d}], got {k}")
        self.mean_ = X.mean(axis=0)
        _, sing, vt = np.linalg.svd(X - self.mean_, full_matrices=False)
        variances = sing**2 / n
        total = variances.sum()
        if total == 0.0:
            raise ContractError("input has zero total variance")
        for row in vt:
            if row[np.argmax(np.abs(row))] < 0.0:
                row *= -1.0
        self.components_ = vt[:k]
        self.full_variance_ratio_ = variances / total
        self.explained_variance_ratio_ = self.full_variance_ratio_[:k]
        self.cumulative_ratio_ = np.cumsum(self.full_variance_ratio_)[:k]
        self.total_variance_ = float(total)
        self.n_features_in_ = d
        return self

    def transform(self, X):
        self._check_fitted()
        X = _as_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ContractError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        return (X - self.mean_) @ self.components_.T

    def inverse_transform(self, X):
        self._check_fitted()
        X = np.asarray(X, dtype=float)
        return X @ self.components_ + self.mean_

    def _check_fitted(self):
        if not hasattr(self, "components_"):
            raise NotFittedError("PrincipalComponents is not fitted")


def correlation_matrix(dataset: TabularDataset) -> np.ndarray:
    """Pearson correlations over all feature columns plus the target (last)."""
    columns = dataset.features
    if dataset.targets is not None:
        columns = np.hstack([columns, dataset.targets[:, None]])
    names = list(dataset.feature_names) + (
        [dataset.target_name or "target"] if dataset.targets is not None else []
    )
    stds = columns.std(axis=0)
    for i, s in enumerate(stds):
        if s == 0.0:
            raise ContractError(f"column {names[i]!r} has zero variance")
    return np.corrcoef(columns, rowvar=False)


def train_test_split(dataset: TabularDataset, fraction: float, seed) -> tuple[TabularDataset, TabularDataset]:
    """Shuffled split holding out ``fraction`` of rows for testing.

    The training size is ceil((1 - fraction) * n), so 506 rows at 0.2 give a
    405/101 split.  Same seed, same split.
    """
    if not 0.0 < fraction < 1.0:
        raise ContractError(f"fraction must lie in (0, 1), got {fraction}")
    n = dataset.n_rows
    n_train = math.ceil((1.0 - fraction) * n)
    if n_train == 0 or n_train == n:
        raise ContractError(f"fraction {fraction} leaves an empty split for {n} rows")
    perm = np.random.default_rng(seed).permutation(n)
    return dataset.take(perm[:n_train]), dataset.take(perm[n_train:])


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ContractError(f"expected a non-empty 2-D matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ContractError("matrix entries must be finite")
    return X
