"""Gaussian naive Bayes."""

from dataclasses import dataclass

import numpy as np

from ..dataio import Dataset
from ..errors import ParameterError
from .base import FittedModel, PROB, register


@dataclass
class GaussianNbParams:
    priors: np.ndarray      # (2,)
    means: np.ndarray       # (2, d)
    variances: np.ndarray   # (2, d), smoothing already added

    def _joint_log_likelihood(self, X):
        out = np.empty((X.shape[0], 2))
        for c in range(2):
            var = self.variances[c]
            log_det = np.sum(np.log(2.0 * np.pi * var))
            maha = ((X - self.means[c]) ** 2 / var).sum(axis=1)
            out[:, c] = np.log(self.priors[c]) - 0.5 * (log_det + maha)
        return out

    def score_matrix(self, X):
        jll = self._joint_log_likelihood(X)
        top = jll.max(axis=1, keepdims=True)
        p = np.exp(jll - top)
        return p[:, 1] / p.sum(axis=1)

    def to_state(self):
        return {"priors": self.priors.tolist(), "means": self.means.tolist(),
                "variances": self.variances.tolist()}

    @classmethod
    def from_state(cls, state):
        return cls(priors=np.array(state["priors"], dtype=np.float64),
                   means=np.array(state["means"], dtype=np.float64),
                   variances=np.array(state["variances"], dtype=np.float64))


def fit_gaussian_nb(train: Dataset, var_smoothing: float = 1e-9) -> FittedModel:
    """Per-class per-feature Gaussian MLE with variance smoothing
    proportional to the largest feature variance."""
    if var_smoothing < 0:
        raise ParameterError("var_smoothing must be nonnegative")
    X, y = train.X, train.y
    if np.unique(y).size < 2:
        raise ParameterError("training data must contain both classes")
    eps = var_smoothing * X.var(axis=0).max()
    priors = np.array([(y == 0).mean(), (y == 1).mean()])
    means = np.vstack([X[y == c].mean(axis=0) for c in (0, 1)])
    variances = np.vstack([X[y == c].var(axis=0) for c in (0, 1)]) + eps
    variances = np.maximum(variances, 1e-30)
    return FittedModel(
        algorithm="gaussian_nb",
        feature_names=train.feature_names,
        hyperparameters={"var_smoothing": var_smoothing},
        params=GaussianNbParams(priors=priors, means=means, variances=variances),
        kind=PROB,
    )


register("gaussian_nb", GaussianNbParams)
