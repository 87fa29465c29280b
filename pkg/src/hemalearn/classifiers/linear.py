"""Logistic regression (penalized Newton) and the binomial GLM (IRLS)."""

import warnings
from dataclasses import dataclass

import numpy as np

from ..dataio import Dataset
from ..errors import ConvergenceWarning, DataWarning, ParameterError
from .base import FittedModel, PROB, register


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _warn_if_unscaled(X):
    if np.abs(X.mean(axis=0)).max() > 2.0 or X.std(axis=0).max() > 5.0:
        warnings.warn("features look unstandardized; consider scaling first",
                      DataWarning)


@dataclass
class LinearParams:
    intercept: float
    coef: np.ndarray

    def linear_predictor(self, X):
        return self.intercept + X @ self.coef

    def score_matrix(self, X):
        return _sigmoid(self.linear_predictor(X))

    def to_state(self):
        return {"intercept": self.intercept, "coef": self.coef.tolist()}

    @classmethod
    def from_state(cls, state):
        return cls(intercept=float(state["intercept"]),
                   coef=np.array(state["coef"], dtype=np.float64))


def _newton_logistic(X, y, l2_reg, max_iter, tol):
    n, d = X.shape
    A = np.hstack([np.ones((n, 1)), X])
    beta = np.zeros(d + 1)
    penalty = np.zeros(d + 1)
    penalty[1:] = l2_reg  # intercept unpenalized
    converged = False
    for _ in range(max_iter):
        p = _sigmoid(A @ beta)
        grad = A.T @ (y - p) - penalty * beta
        if np.abs(grad).max() < tol:
            converged = True
            break
        W = np.maximum(p * (1.0 - p), 1e-12)
        H = (A * W[:, None]).T @ A + np.diag(penalty + 1e-12)
        beta = beta + np.linalg.solve(H, grad)
    return beta, converged


def fit_logistic(train: Dataset, l2_reg: float = 1.0, max_iter: int = 100,
                 tol: float = 1e-6) -> FittedModel:
    """Maximize the l2-penalized log-likelihood by Newton steps.

    Convergence is gradient max-norm < tol; on perfectly separable data
    with no penalty the iteration cap acts as a divergence guard.
    """
    if l2_reg < 0:
        raise ParameterError("l2_reg must be nonnegative")
    _warn_if_unscaled(train.X)
    y = train.y.astype(np.float64)
    beta, converged = _newton_logistic(train.X, y, l2_reg, max_iter, tol)
    if not converged:
        warnings.warn(f"logistic fit hit max_iter={max_iter} before tol={tol}",
                      ConvergenceWarning)
    return FittedModel(
        algorithm="logistic",
        feature_names=train.feature_names,
        hyperparameters={"l2_reg": l2_reg, "max_iter": max_iter, "tol": tol},
        params=LinearParams(intercept=float(beta[0]), coef=beta[1:].copy()),
        kind=PROB,
    )


@dataclass
class GlmParams(LinearParams):
    deviance: float = 0.0

    def to_state(self):
        state = super().to_state()
        state["deviance"] = self.deviance
        return state

    @classmethod
    def from_state(cls, state):
        return cls(intercept=float(state["intercept"]),
                   coef=np.array(state["coef"], dtype=np.float64),
                   deviance=float(state.get("deviance", 0.0)))


def binomial_deviance(y, p):
    eps = 1e-12
    p = np.clip(p, eps, 1 - eps)
    return float(-2.0 * np.sum(y * np.log(p) + (1 - y) * np.log(1 - p)))


def fit_glm(train: Dataset, family: str = "binomial", link: str = "logit",
            max_iter: int = 25, tol: float = 1e-8) -> FittedModel:
    """Unpenalized binomial-logit GLM solved by iteratively reweighted
    least squares on the working response; reports the model deviance."""
    if family != "binomial" or link != "logit":
        raise ParameterError("only the binomial family with logit link is supported")
    _warn_if_unscaled(train.X)
    X = train.X
    y = train.y.astype(np.float64)
    n, d = X.shape
    A = np.hstack([np.ones((n, 1)), X])
    beta = np.zeros(d + 1)
    converged = False
    for _ in range(max_iter):
        eta = A @ beta
        p = _sigmoid(eta)
        W = np.maximum(p * (1.0 - p), 1e-12)
        z = eta + (y - p) / W
        AW = A * W[:, None]
        new_beta = np.linalg.solve(A.T @ AW + 1e-12 * np.eye(d + 1), AW.T @ z)
        step = np.abs(new_beta - beta).max()
        beta = new_beta
        if step < tol:
            converged = True
            break
    if not converged:
        warnings.warn(f"GLM IRLS did not converge in {max_iter} iterations; "
                      "returning the last iterate", ConvergenceWarning)
    deviance = binomial_deviance(y, _sigmoid(A @ beta))
    return FittedModel(
        algorithm="glm",
        feature_names=train.feature_names,
        hyperparameters={"family": family, "link": link, "max_iter": max_iter},
        params=GlmParams(intercept=float(beta[0]), coef=beta[1:].copy(),
                         deviance=deviance),
        kind=PROB,
    )


register("logistic", LinearParams)
register("glm", GlmParams)
