"""Uniform fitted-model contract: predict hard labels and class scores."""

import json
from dataclasses import dataclass

import numpy as np

from ..dataio import Dataset
from ..errors import FeatureMismatchError

MODEL_FORMAT_VERSION = 1

# How hard labels derive from scores.
PROB = "prob"            # probability-like score, label = score >= 0.5
MARGIN = "margin"        # signed decision value, label = score >= 0
VOTE_STRICT = "vote"     # vote fraction, ties go to class 0 (label = score > 0.5)


@dataclass(frozen=True)
class FittedModel:
    algorithm: str
    feature_names: tuple
    hyperparameters: dict
    params: object
    kind: str


def _aligned_matrix(model: FittedModel, ds: Dataset) -> np.ndarray:
    have = set(ds.feature_names)
    want = set(model.feature_names)
    missing = sorted(want - have)
    extra = sorted(have - want)
    if missing or extra:
        raise FeatureMismatchError(
            f"{model.algorithm}: feature mismatch (missing {missing}, extra {extra})")
    idx = [ds.feature_names.index(n) for n in model.feature_names]
    return ds.X[:, idx]


def predict_score(model: FittedModel, ds: Dataset) -> np.ndarray:
    """Class-1 scores; order-insensitive in the dataset's column order."""
    return model.params.score_matrix(_aligned_matrix(model, ds))


def predict(model: FittedModel, ds: Dataset) -> np.ndarray:
    s = predict_score(model, ds)
    if model.kind == MARGIN:
        return (s >= 0.0).astype(np.int64)
    if model.kind == VOTE_STRICT:
        return (s > 0.5).astype(np.int64)
    return (s >= 0.5).astype(np.int64)


_REGISTRY = {}


def register(algorithm: str, params_cls) -> None:
    _REGISTRY[algorithm] = params_cls


def save_model(model: FittedModel, path) -> None:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "algorithm": model.algorithm,
        "kind": model.kind,
        "feature_names": list(model.feature_names),
        "hyperparameters": model.hyperparameters,
        "parameters": model.params.to_state(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path) -> FittedModel:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {version}")
    algorithm = doc["algorithm"]
    if algorithm not in _REGISTRY:
        raise ValueError(f"unknown algorithm id {algorithm!r}")
    params = _REGISTRY[algorithm].from_state(doc["parameters"])
    return FittedModel(
        algorithm=algorithm,
        feature_names=tuple(doc["feature_names"]),
        hyperparameters=doc["hyperparameters"],
        params=params,
        kind=doc["kind"],
    )
