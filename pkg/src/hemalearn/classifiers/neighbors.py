"""k-nearest-neighbor classification (lazy; stores the training set)."""

from dataclasses import dataclass

import numpy as np

from ..dataio import Dataset
from ..errors import ParameterError
from .base import FittedModel, VOTE_STRICT, register


@dataclass
class KnnParams:
    k: int
    X: np.ndarray
    y: np.ndarray

    def score_matrix(self, Q, chunk: int = 1024):
        out = np.empty(Q.shape[0])
        xx = (self.X ** 2).sum(axis=1)[None, :]
        for start in range(0, Q.shape[0], chunk):
            block = Q[start:start + chunk]
            qq = (block ** 2).sum(axis=1)[:, None]
            d2 = np.maximum(qq + xx - 2.0 * block @ self.X.T, 0.0)
            # Stable argsort: equal distances resolve to the lower stored
            # index, i.e. the lower original row id.
            nearest = np.argsort(d2, axis=1, kind="stable")[:, :self.k]
            out[start:start + block.shape[0]] = self.y[nearest].mean(axis=1)
        return out

    def to_state(self):
        return {"k": self.k, "X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_state(cls, state):
        return cls(k=int(state["k"]),
                   X=np.array(state["X"], dtype=np.float64),
                   y=np.array(state["y"], dtype=np.float64))


def fit_knn(train: Dataset, k: int = 5, metric: str = "euclidean") -> FittedModel:
    """Majority vote among the k nearest training rows (Euclidean).

    Distance ties take the lower row id first; vote ties go to class 0.
    """
    if metric != "euclidean":
        raise ParameterError("only the euclidean metric is supported")
    if not 1 <= k <= train.n_rows:
        raise ParameterError(f"k must be in [1, {train.n_rows}], got {k}")
    order = np.argsort(train.row_ids, kind="stable")
    return FittedModel(
        algorithm="knn",
        feature_names=train.feature_names,
        hyperparameters={"k": k, "metric": metric},
        params=KnnParams(k=k, X=train.X[order].copy(),
                         y=train.y[order].astype(np.float64)),
        kind=VOTE_STRICT,
    )


register("knn", KnnParams)
