"""Scaling, correlation analysis, correlation-driven feature pruning, PCA."""

import warnings
from dataclasses import dataclass

import numpy as np

from .dataio import CONTINUOUS, Dataset
from .errors import ComputationError, DataWarning, ParameterError, ReductionError, SchemaError
from .linalg import jacobi_eigh


@dataclass(frozen=True)
class ScalerParams:
    """Per-column parameters fit on training data only.

    mode "standard" stores (center=mean, scale=population stddev); mode
    "minmax" stores (center=min, scale=max-min). Binary columns carry
    scale 0 and pass through unchanged.
    """

    mode: str
    columns: tuple
    center: np.ndarray
    scale: np.ndarray


def _scaled_columns(ds: Dataset):
    return np.array([c.kind == CONTINUOUS for c in ds.schema.columns])


def fit_standardizer(train: Dataset) -> ScalerParams:
    """Mean/stddev (population convention) of each continuous column."""
    mask = _scaled_columns(train)
    center = np.zeros(train.n_features)
    scale = np.zeros(train.n_features)
    X = train.X
    center[mask] = X[:, mask].mean(axis=0)
    scale[mask] = X[:, mask].std(axis=0)  # ddof=0
    constant = mask & (scale == 0.0)
    if constant.any():
        names = [train.feature_names[i] for i in np.flatnonzero(constant)]
        warnings.warn(f"constant column(s) {names} scale to zeros", DataWarning)
    return ScalerParams("standard", train.feature_names, center, scale)


def fit_minmax(train: Dataset) -> ScalerParams:
    mask = _scaled_columns(train)
    center = np.zeros(train.n_features)
    scale = np.zeros(train.n_features)
    X = train.X
    center[mask] = X[:, mask].min(axis=0)
    scale[mask] = X[:, mask].max(axis=0) - center[mask]
    constant = mask & (scale == 0.0)
    if constant.any():
        names = [train.feature_names[i] for i in np.flatnonzero(constant)]
        warnings.warn(f"constant column(s) {names} scale to zeros", DataWarning)
    return ScalerParams("minmax", train.feature_names, center, scale)


def apply_scaler(ds: Dataset, params: ScalerParams) -> Dataset:
    """Apply train-fit parameters unchanged; never refit on test data."""
    if params.columns != ds.feature_names:
        raise SchemaError("scaler was fit on different columns")
    X = ds.X.copy()
    scaled = params.scale > 0
    X[:, scaled] = (X[:, scaled] - params.center[scaled]) / params.scale[scaled]
    constant = (params.scale == 0) & np.array(
        [c.kind == CONTINUOUS for c in ds.schema.columns])
    X[:, constant] = 0.0
    return ds.with_matrix(X, f"scale:{params.mode}")


def minmax_scale(train: Dataset):
    params = fit_minmax(train)
    return apply_scaler(train, params), params


def standardize(train: Dataset):
    params = fit_standardizer(train)
    return apply_scaler(train, params), params


@dataclass(frozen=True)
class CorrelationMatrix:
    names: tuple
    values: np.ndarray  # (d, d), symmetric, unit diagonal

    def get(self, a: str, b: str) -> float:
        i, j = self.names.index(a), self.names.index(b)
        return float(self.values[i, j])

    def write_csv(self, path) -> None:
        import csv
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["feature"] + list(self.names))
            for i, name in enumerate(self.names):
                writer.writerow([name] + [repr(float(v)) for v in self.values[i]])

    def to_json_dict(self) -> dict:
        return {"names": list(self.names),
                "values": [[float(v) for v in row] for row in self.values]}


def correlation_matrix(ds: Dataset) -> CorrelationMatrix:
    """Pearson correlation of every feature pair; constant columns get r=0."""
    if ds.n_rows < 2:
        raise ComputationError("correlation needs at least 2 rows")
    X = ds.X - ds.X.mean(axis=0)
    norms = np.sqrt((X ** 2).sum(axis=0))
    constant = norms == 0
    if constant.any():
        names = [ds.feature_names[i] for i in np.flatnonzero(constant)]
        warnings.warn(f"constant column(s) {names}: correlation set to 0", DataWarning)
    safe = np.where(constant, 1.0, norms)
    U = X / safe
    R = U.T @ U
    R[constant, :] = 0.0
    R[:, constant] = 0.0
    R = np.clip(0.5 * (R + R.T), -1.0, 1.0)
    np.fill_diagonal(R, 1.0)
    return CorrelationMatrix(ds.feature_names, R)


@dataclass(frozen=True)
class ReductionPlan:
    """Either an explicit drop list or a |r|-threshold pruning policy."""

    mode: str  # "drop-list" | "threshold"
    dropped_columns: tuple = ()
    threshold: float = 0.8

    def __post_init__(self):
        if self.mode not in ("drop-list", "threshold"):
            raise ParameterError(f"unknown reduction mode {self.mode!r}")
        if self.mode == "threshold" and not 0.0 < self.threshold <= 1.0:
            raise ParameterError("threshold must be in (0, 1]")


# The five features removed before the published clustering runs.
PAPER_DROP_LIST = ("HAEMATOCRIT", "HAEMOGLOBINS", "ERYTHROCYTE", "MCH", "MCHC")


def threshold_drop_order(corr: CorrelationMatrix, threshold: float):
    """Greedy pruning: while some pair has |r| > threshold, drop the member
    of the worst pair with the larger mean |r| to the remaining features
    (ties broken toward the lexicographically later name)."""
    names = list(corr.names)
    R = np.abs(corr.values.copy())
    np.fill_diagonal(R, 0.0)
    alive = list(range(len(names)))
    dropped = []
    while len(alive) > 1:
        sub = R[np.ix_(alive, alive)]
        flat = np.argmax(sub)
        i, j = divmod(flat, sub.shape[1])
        if sub[i, j] <= threshold:
            break
        a, b = alive[i], alive[j]
        mean_a = sub[i].sum() / (len(alive) - 1)
        mean_b = sub[j].sum() / (len(alive) - 1)
        if mean_a > mean_b:
            victim = a
        elif mean_b > mean_a:
            victim = b
        else:
            victim = a if names[a] > names[b] else b
        dropped.append(names[victim])
        alive.remove(victim)
    return tuple(dropped)


def reduce_features(ds: Dataset, plan: ReductionPlan) -> Dataset:
    if plan.mode == "drop-list":
        dropped = tuple(plan.dropped_columns)
        unknown = set(dropped) - set(ds.feature_names)
        if unknown:
            raise SchemaError(f"drop list names unknown column(s) {sorted(unknown)}")
    else:
        dropped = threshold_drop_order(correlation_matrix(ds), plan.threshold)
    keep = [n for n in ds.feature_names if n not in set(dropped)]
    if not keep:
        raise ReductionError("reduction would drop every feature")
    return ds.select_features(keep)


@dataclass(frozen=True)
class PcaResult:
    components: np.ndarray         # (d, k), orthonormal columns
    explained_variance: np.ndarray  # (k,), nonincreasing
    mean: np.ndarray


def pca_transform(ds: Dataset, n_components: int):
    """Project centered data onto the top principal components.

    Covariance uses the population convention (divide by n), matching the
    standardizer. Returns (projected Dataset, PcaResult).
    """
    d = ds.n_features
    if not 1 <= n_components <= d:
        raise ParameterError(f"n_components must be in [1, {d}], got {n_components}")
    mean = ds.X.mean(axis=0)
    centered = ds.X - mean
    cov = centered.T @ centered / ds.n_rows
    eigvals, eigvecs = jacobi_eigh(cov)
    eigvals = np.maximum(eigvals, 0.0)
    components = eigvecs[:, :n_components]
    projected = centered @ components
    from dataclasses import replace
    from .dataio import Column
    schema = replace(
        ds.schema,
        columns=tuple(Column(f"PC{i + 1}", CONTINUOUS) for i in range(n_components)),
    )
    out = Dataset(schema=schema, X=projected, y=ds.y.copy(), row_ids=ds.row_ids.copy(),
                  transforms=ds.transforms + (f"pca:{n_components}",))
    return out, PcaResult(components=components,
                          explained_variance=eigvals[:n_components], mean=mean)
