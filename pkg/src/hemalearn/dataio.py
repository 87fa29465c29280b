"""Loading, validation, summaries and splits for the blood-panel dataset."""

import csv
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import LabelError, RowError, SchemaError, SplitError

CONTINUOUS = "continuous"
BINARY = "categorical-binary"

# Accepted label column variants and their encodings (0 = mild/out-care,
# 1 = severe/in-care).
LABEL_VARIANTS = {
    "SOURCE": {"out": 0, "in": 1},
    "SEVERITY LEVEL": {"mild": 0, "severe": 1},
}

SEX_CODES = {"f": 0.0, "m": 1.0, "0": 0.0, "1": 1.0}

EHR_FEATURE_NAMES = (
    "HAEMATOCRIT",
    "HAEMOGLOBINS",
    "ERYTHROCYTE",
    "LEUCOCYTE",
    "THROMBOCYTE",
    "MCH",
    "MCHC",
    "MCV",
    "AGE",
    "SEX",
)

AGE_MAX = 120


@dataclass(frozen=True)
class Column:
    name: str
    kind: str

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, BINARY):
            raise SchemaError(f"unknown column kind {self.kind!r} for {self.name!r}")


@dataclass(frozen=True)
class FeatureSchema:
    """Feature columns plus the (binary) label column of a dataset."""

    columns: tuple
    label_column: str
    positive_label: str

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate feature column names")
        if self.label_column in names:
            raise SchemaError("label column also listed as a feature")
        if self.label_column not in LABEL_VARIANTS:
            raise SchemaError(
                f"label column must be one of {sorted(LABEL_VARIANTS)}, "
                f"got {self.label_column!r}"
            )
        codes = LABEL_VARIANTS[self.label_column]
        if self.positive_label.lower() not in codes or codes[self.positive_label.lower()] != 1:
            raise SchemaError(f"positive label {self.positive_label!r} must encode to 1")

    @property
    def feature_names(self):
        return tuple(c.name for c in self.columns)

    def kind_of(self, name: str) -> str:
        for c in self.columns:
            if c.name == name:
                return c.kind
        raise SchemaError(f"unknown column {name!r}")

    def label_codes(self):
        return LABEL_VARIANTS[self.label_column]


def ehr_schema(label_column: str = "SOURCE") -> FeatureSchema:
    """The standard 10-feature blood panel schema, either label variant."""
    positive = {"SOURCE": "in", "SEVERITY LEVEL": "Severe"}[label_column]
    cols = tuple(
        Column(name, BINARY if name == "SEX" else CONTINUOUS)
        for name in EHR_FEATURE_NAMES
    )
    return FeatureSchema(columns=cols, label_column=label_column, positive_label=positive)


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix with encoded binary labels.

    ``X`` is (n_rows, n_features) float64 in schema column order, ``y`` is
    {0,1}, ``row_ids`` index back into the originally loaded file, and
    ``transforms`` records what has been applied since loading.
    """

    schema: FeatureSchema
    X: np.ndarray
    y: np.ndarray
    row_ids: np.ndarray
    transforms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.X.ndim != 2:
            raise SchemaError("X must be 2-D")
        if self.X.shape[0] != self.y.shape[0] or self.X.shape[0] != self.row_ids.shape[0]:
            raise SchemaError("X, y and row_ids must have equal length")
        if self.X.shape[1] != len(self.schema.columns):
            raise SchemaError("X width does not match schema")
        self.X.setflags(write=False)
        self.y.setflags(write=False)
        self.row_ids.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def feature_names(self):
        return self.schema.feature_names

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.feature_names.index(name)]

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return replace(
            self,
            X=self.X[idx].copy(),
            y=self.y[idx].copy(),
            row_ids=self.row_ids[idx].copy(),
        )

    def with_matrix(self, X: np.ndarray, transform: str) -> "Dataset":
        return replace(self, X=np.asarray(X, dtype=np.float64).copy(),
                       transforms=self.transforms + (transform,))

    def select_features(self, names) -> "Dataset":
        keep = [n for n in self.feature_names if n in set(names)]
        missing = set(names) - set(self.feature_names)
        if missing:
            raise SchemaError(f"unknown feature(s) {sorted(missing)}")
        idx = [self.feature_names.index(n) for n in keep]
        schema = replace(self.schema,
                         columns=tuple(c for c in self.schema.columns if c.name in keep))
        return Dataset(
            schema=schema,
            X=self.X[:, idx].copy(),
            y=self.y.copy(),
            row_ids=self.row_ids.copy(),
            transforms=self.transforms + (f"select:{','.join(keep)}",),
        )


def _parse_label(text: str, codes: dict, row_index: int):
    key = text.strip().lower()
    if key not in codes:
        raise LabelError(f"row {row_index}: unknown label value {text!r}")
    return codes[key]


def _parse_cell(text: str, name: str, row_index: int, strict: bool):
    raw = text.strip()
    if name == "SEX":
        code = SEX_CODES.get(raw.lower())
        if code is None:
            raise RowError(row_index, f"SEX value {raw!r} not in F/M")
        return code
    try:
        value = float(raw)
    except ValueError:
        if strict:
            raise RowError(row_index, f"cell {name}={raw!r} is not numeric") from None
        return math.nan
    if not math.isfinite(value):
        if strict:
            raise RowError(row_index, f"cell {name}={raw!r} is not finite")
        return math.nan
    if name == "AGE" and strict:
        if value != int(value) or not (1 <= value <= AGE_MAX):
            raise RowError(row_index, f"AGE={raw!r} not a positive integer <= {AGE_MAX}")
    return value


def infer_schema(header) -> FeatureSchema:
    """Pick the label variant matching the header, or fail."""
    names = {h.strip().upper() for h in header}
    for label_col in LABEL_VARIANTS:
        if label_col in names:
            return ehr_schema(label_col)
    raise SchemaError(f"no known label column in header {sorted(names)}")


def load_dataset(path, schema: FeatureSchema = None, strict: bool = True) -> Dataset:
    """Load a comma-delimited file into a Dataset.

    When ``schema`` is None the label variant (SOURCE vs SEVERITY LEVEL) is
    inferred from the header. In strict mode any unparseable cell raises
    RowError with its row index; otherwise continuous cells fall back to
    the column mean (foreign-data mode).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if schema is None:
            schema = infer_schema(header)
        expected = set(schema.feature_names) | {schema.label_column}
        got = {h.upper() for h in header}
        missing = expected - got
        extra = got - expected
        if missing:
            raise SchemaError(f"{path}: missing column(s) {sorted(missing)}")
        if extra:
            raise SchemaError(f"{path}: unexpected column(s) {sorted(extra)}")
        positions = {h.upper(): i for i, h in enumerate(header)}
        feat_pos = [positions[n] for n in schema.feature_names]
        label_pos = positions[schema.label_column]
        codes = schema.label_codes()

        rows, labels = [], []
        for row_index, raw in enumerate(reader):
            if not raw or all(not c.strip() for c in raw):
                continue
            if len(raw) != len(header):
                raise RowError(row_index, f"expected {len(header)} cells, got {len(raw)}")
            labels.append(_parse_label(raw[label_pos], codes, row_index))
            rows.append([
                _parse_cell(raw[p], name, row_index, strict)
                for p, name in zip(feat_pos, schema.feature_names)
            ])

    if not rows:
        raise SchemaError(f"{path}: no data rows")
    X = np.array(rows, dtype=np.float64)
    if not strict:
        for j in range(X.shape[1]):
            col = X[:, j]
            bad = np.isnan(col)
            if bad.all():
                raise SchemaError(f"column {schema.feature_names[j]} has no numeric values")
            if bad.any():
                col = col.copy()
                col[bad] = col[~bad].mean()
                X[:, j] = col
    y = np.array(labels, dtype=np.int64)
    return Dataset(schema=schema, X=X, y=y,
                   row_ids=np.arange(X.shape[0], dtype=np.int64))


def _format_cell(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def write_csv(ds: Dataset, path) -> None:
    """Write a Dataset back to its CSV form (SEX and label re-encoded)."""
    inverse_label = {v: k for k, v in ds.schema.label_codes().items()}
    # Restore the document casing used by the two public file variants.
    case = {"mild": "Mild", "severe": "Severe", "in": "in", "out": "out"}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(ds.feature_names) + [ds.schema.label_column])
        sex_idx = ds.feature_names.index("SEX") if "SEX" in ds.feature_names else None
        for i in range(ds.n_rows):
            cells = []
            for j, name in enumerate(ds.feature_names):
                v = ds.X[i, j]
                if j == sex_idx:
                    cells.append("F" if v == 0 else "M")
                else:
                    cells.append(_format_cell(v))
            cells.append(case[inverse_label[int(ds.y[i])]])
            writer.writerow(cells)


@dataclass(frozen=True)
class ColumnSummary:
    name: str
    unique_count: int
    minimum: float
    mean: float
    median: float
    maximum: float
    histogram_counts: tuple
    histogram_edges: tuple


@dataclass(frozen=True)
class SummaryReport:
    n_rows: int
    label_counts: dict
    columns: tuple

    def to_json_dict(self) -> dict:
        return {
            "n_rows": self.n_rows,
            "label_counts": {str(k): v for k, v in self.label_counts.items()},
            "columns": [
                {
                    "name": c.name,
                    "unique_count": c.unique_count,
                    "min": c.minimum,
                    "mean": c.mean,
                    "median": c.median,
                    "max": c.maximum,
                    "histogram_counts": list(c.histogram_counts),
                    "histogram_edges": list(c.histogram_edges),
                }
                for c in self.columns
            ],
        }

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["column", "unique_count", "min", "mean", "median", "max"])
            for c in self.columns:
                writer.writerow([c.name, c.unique_count, c.minimum, c.mean,
                                 c.median, c.maximum])


HISTOGRAM_BINS = 20


def summarize(ds: Dataset) -> SummaryReport:
    """Per-column unique counts, range statistics and 20-bin histograms."""
    if ds.n_rows == 0:
        raise SchemaError("cannot summarize an empty dataset")
    columns = []
    for j, name in enumerate(ds.feature_names):
        col = ds.X[:, j]
        counts, edges = np.histogram(col, bins=HISTOGRAM_BINS)
        columns.append(ColumnSummary(
            name=name,
            unique_count=int(np.unique(col).size),
            minimum=float(col.min()),
            mean=float(col.mean()),
            median=float(np.median(col)),
            maximum=float(col.max()),
            histogram_counts=tuple(int(c) for c in counts),
            histogram_edges=tuple(float(e) for e in edges),
        ))
    values, counts = np.unique(ds.y, return_counts=True)
    label_counts = {int(v): int(c) for v, c in zip(values, counts)}
    return SummaryReport(n_rows=ds.n_rows, label_counts=label_counts,
                         columns=tuple(columns))


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float
    stratified: bool
    seed: int

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise SplitError(f"test_fraction must be in (0,1), got {self.test_fraction}")
        if self.seed < 0:
            raise SplitError("seed must be a non-negative integer")


def _apportion(class_counts, total_test):
    """Largest-remainder apportionment of the test quota across classes."""
    n = sum(class_counts.values())
    quotas = {c: cnt * total_test / n for c, cnt in class_counts.items()}
    take = {c: int(math.floor(q)) for c, q in quotas.items()}
    leftover = total_test - sum(take.values())
    by_frac = sorted(quotas, key=lambda c: (-(quotas[c] - take[c]), c))
    for c in by_frac[:leftover]:
        take[c] += 1
    return take


def stratified_split(ds: Dataset, spec: SplitSpec):
    """Deterministic train/test partition; test size = ceil(n * fraction)."""
    n = ds.n_rows
    n_test = int(math.ceil(n * spec.test_fraction))
    if n_test == 0 or n_test == n:
        raise SplitError(f"test_fraction {spec.test_fraction} leaves an empty side")
    rng = np.random.default_rng(spec.seed)
    if spec.stratified:
        values, counts = np.unique(ds.y, return_counts=True)
        if values.size < 2:
            raise SplitError("stratified split requires both classes present")
        class_counts = {int(v): int(c) for v, c in zip(values, counts)}
        take = _apportion(class_counts, n_test)
        for c, t in take.items():
            if t < 1 or class_counts[c] - t < 1:
                raise SplitError(
                    f"class {c}: cannot place >=1 sample on each side "
                    f"(count {class_counts[c]}, test quota {t})"
                )
        test_parts = []
        for c in sorted(class_counts):
            members = np.flatnonzero(ds.y == c)
            perm = rng.permutation(members.size)
            test_parts.append(members[perm[: take[c]]])
        test_idx = np.sort(np.concatenate(test_parts))
    else:
        perm = rng.permutation(n)
        test_idx = np.sort(perm[:n_test])
    mask = np.zeros(n, dtype=bool)
    mask[test_idx] = True
    train_idx = np.flatnonzero(~mask)
    return ds.subset(train_idx), ds.subset(test_idx)


def kfold_splits(ds: Dataset, k: int, seed: int):
    """Shuffled k-fold index partitions; fold sizes within +-1 of n/k."""
    n = ds.n_rows
    if k < 2:
        raise SplitError(f"k must be >= 2, got {k}")
    if k > n:
        raise SplitError(f"k={k} exceeds n_rows={n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    base, rem = divmod(n, k)
    folds = []
    start = 0
    for i in range(k):
        size = base + (1 if i < rem else 0)
        val = np.sort(perm[start:start + size])
        start += size
        mask = np.zeros(n, dtype=bool)
        mask[val] = True
        folds.append((np.flatnonzero(~mask), val))
    return folds
