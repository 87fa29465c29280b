"""Margin classifiers: kernel SVC by sequential minimal optimization and a
linear large-margin solver by dual coordinate descent, with an optional
self-training wrapper for partially labeled data."""

import warnings
from dataclasses import dataclass

import numpy as np

from ..dataio import Dataset
from ..errors import ConvergenceWarning, ParameterError
from .base import FittedModel, MARGIN, register


def _rbf_kernel(A, B, gamma):
    aa = (A ** 2).sum(axis=1)[:, None]
    bb = (B ** 2).sum(axis=1)[None, :]
    return np.exp(-gamma * np.maximum(aa + bb - 2.0 * A @ B.T, 0.0))


def _default_gamma(X):
    var = X.var(axis=0).mean()
    return 1.0 / (X.shape[1] * var) if var > 0 else 1.0


@dataclass
class SvcParams:
    kernel: str
    gamma: float
    support_vectors: np.ndarray
    dual_coef: np.ndarray       # alpha_i * y_i for support vectors
    intercept: float
    dual_objective: float
    kkt_violation: float

    def score_matrix(self, X):
        if self.kernel == "rbf":
            K = _rbf_kernel(X, self.support_vectors, self.gamma)
        else:
            K = X @ self.support_vectors.T
        return K @ self.dual_coef + self.intercept

    def to_state(self):
        return {"kernel": self.kernel, "gamma": self.gamma,
                "support_vectors": self.support_vectors.tolist(),
                "dual_coef": self.dual_coef.tolist(),
                "intercept": self.intercept,
                "dual_objective": self.dual_objective,
                "kkt_violation": self.kkt_violation}

    @classmethod
    def from_state(cls, state):
        return cls(kernel=state["kernel"], gamma=float(state["gamma"]),
                   support_vectors=np.array(state["support_vectors"], dtype=np.float64),
                   dual_coef=np.array(state["dual_coef"], dtype=np.float64),
                   intercept=float(state["intercept"]),
                   dual_objective=float(state["dual_objective"]),
                   kkt_violation=float(state["kkt_violation"]))


def _smo(K, y, c, tol, max_iter):
    """Maximal-violating-pair SMO on the standard C-SVC dual."""
    n = y.size
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 1/2 a'Qa - e'a at a=0
    for _ in range(max_iter):
        ng = -y * grad
        up = ((alpha < c) & (y > 0)) | ((alpha > 0) & (y < 0))
        low = ((alpha < c) & (y < 0)) | ((alpha > 0) & (y > 0))
        if not up.any() or not low.any():
            break
        i = int(np.flatnonzero(up)[np.argmax(ng[up])])
        j = int(np.flatnonzero(low)[np.argmin(ng[low])])
        violation = ng[i] - ng[j]
        if violation < tol:
            break
        qii, qjj, qij = K[i, i], K[j, j], K[i, j] * y[i] * y[j]
        quad = max(qii + qjj - 2.0 * qij, 1e-12)
        old_i, old_j = alpha[i], alpha[j]
        if y[i] != y[j]:
            delta = (-grad[i] - grad[j]) / quad
            diff = old_i - old_j
            ai, aj = old_i + delta, old_j + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            else:
                if ai < 0:
                    ai, aj = 0.0, -diff
            if diff > 0:
                if ai > c:
                    ai, aj = c, c - diff
            else:
                if aj > c:
                    aj, ai = c, c + diff
        else:
            delta = (grad[i] - grad[j]) / quad
            total = old_i + old_j
            ai, aj = old_i - delta, old_j + delta
            if total > c:
                if ai > c:
                    ai, aj = c, total - c
                if aj > c:
                    aj, ai = c, total - c
            else:
                if aj < 0:
                    aj, ai = 0.0, total
                if ai < 0:
                    ai, aj = 0.0, total
        ai = float(np.clip(ai, 0.0, c))
        aj = float(np.clip(aj, 0.0, c))
        di, dj = ai - old_i, aj - old_j
        if abs(di) < 1e-15 and abs(dj) < 1e-15:
            break
        alpha[i], alpha[j] = ai, aj
        grad += (K[:, i] * y * y[i]) * di + (K[:, j] * y * y[j]) * dj
    ng = -y * grad
    up = ((alpha < c) & (y > 0)) | ((alpha > 0) & (y < 0))
    low = ((alpha < c) & (y < 0)) | ((alpha > 0) & (y > 0))
    m = ng[up].max() if up.any() else 0.0
    M = ng[low].min() if low.any() else 0.0
    violation = max(m - M, 0.0)
    free = (alpha > 1e-12) & (alpha < c - 1e-12)
    if free.any():
        b = float(ng[free].mean())
    else:
        b = float((m + M) / 2.0)
    dual_obj = float(alpha.sum() - 0.5 * (alpha * y) @ (K @ (alpha * y)))
    return alpha, b, dual_obj, float(violation)


def fit_svc(train: Dataset, c: float = 1.0, kernel: str = "rbf", gamma=None,
            tol: float = 1e-3, max_passes: int = 20) -> FittedModel:
    """Soft-margin SVC trained by pairwise dual updates.

    Labels map to {-1,+1} internally; the fit stops when the largest KKT
    violation drops below tol or after max_passes * n pair updates.
    """
    if c <= 0:
        raise ParameterError("c must be positive")
    if kernel not in ("rbf", "linear"):
        raise ParameterError(f"unknown kernel {kernel!r}")
    X = train.X
    y = np.where(train.y == 1, 1.0, -1.0)
    if kernel == "rbf":
        g = _default_gamma(X) if gamma is None else float(gamma)
        K = _rbf_kernel(X, X, g)
    else:
        g = 0.0
        K = X @ X.T
    alpha, b, dual_obj, violation = _smo(K, y, c, tol, max_passes * X.shape[0])
    if violation >= tol:
        warnings.warn(f"SMO stopped with KKT violation {violation:.3e} >= tol "
                      f"(dual objective {dual_obj:.6f})", ConvergenceWarning)
    sv = alpha > 1e-12
    params = SvcParams(kernel=kernel, gamma=g,
                       support_vectors=X[sv].copy(),
                       dual_coef=(alpha * y)[sv].copy(),
                       intercept=b, dual_objective=dual_obj,
                       kkt_violation=violation)
    return FittedModel(
        algorithm="svc",
        feature_names=train.feature_names,
        hyperparameters={"c": c, "kernel": kernel, "gamma": g, "tol": tol,
                         "max_passes": max_passes},
        params=params,
        kind=MARGIN,
    )


@dataclass
class FlmParams:
    weights: np.ndarray      # includes the bias as the last entry
    primal_objective: float
    dual_objective: float

    @property
    def duality_gap(self):
        return self.primal_objective - self.dual_objective

    def score_matrix(self, X):
        return X @ self.weights[:-1] + self.weights[-1]

    def to_state(self):
        return {"weights": self.weights.tolist(),
                "primal_objective": self.primal_objective,
                "dual_objective": self.dual_objective}

    @classmethod
    def from_state(cls, state):
        return cls(weights=np.array(state["weights"], dtype=np.float64),
                   primal_objective=float(state["primal_objective"]),
                   dual_objective=float(state["dual_objective"]))


def _dual_cd(X, y, c, tol, max_epochs, rng):
    """Coordinate descent on the L2-regularized hinge-loss dual (bias as an
    augmented constant feature)."""
    n = X.shape[0]
    A = np.hstack([X, np.ones((n, 1))])
    qii = (A ** 2).sum(axis=1)
    alpha = np.zeros(n)
    w = np.zeros(A.shape[1])
    for _ in range(max_epochs):
        worst = 0.0
        for i in rng.permutation(n):
            G = y[i] * (A[i] @ w) - 1.0
            if alpha[i] == 0.0:
                pg = min(G, 0.0)
            elif alpha[i] == c:
                pg = max(G, 0.0)
            else:
                pg = G
            worst = max(worst, abs(pg))
            if pg != 0.0:
                old = alpha[i]
                alpha[i] = min(max(old - G / qii[i], 0.0), c)
                w += (alpha[i] - old) * y[i] * A[i]
        if worst < tol:
            break
    margins = y * (A @ w)
    primal = 0.5 * w @ w + c * np.maximum(0.0, 1.0 - margins).sum()
    dual = alpha.sum() - 0.5 * w @ w
    return w, alpha, float(primal), float(dual)


def fit_fast_large_margin(train: Dataset, c: float = 1.0, tol: float = 1e-3,
                          max_epochs: int = 1000, self_training: bool = False,
                          unlabeled_fraction: float = 0.3,
                          seed: int = 0) -> FittedModel:
    """Linear large-margin classifier via dual coordinate descent.

    With ``self_training`` a fraction of the training rows is treated as
    unlabeled: the model trains on the rest, pseudo-labels the held-out
    rows whose |margin| clears the 0.9 quantile, and retrains once.
    """
    if c <= 0:
        raise ParameterError("c must be positive")
    X = train.X
    y = np.where(train.y == 1, 1.0, -1.0)
    rng = np.random.default_rng(seed)
    if self_training:
        if not 0.0 < unlabeled_fraction < 1.0:
            raise ParameterError("unlabeled_fraction must be in (0,1)")
        n = X.shape[0]
        perm = rng.permutation(n)
        n_unlab = int(round(n * unlabeled_fraction))
        unlab, lab = perm[:n_unlab], perm[n_unlab:]
        w, _, _, _ = _dual_cd(X[lab], y[lab], c, tol, max_epochs, rng)
        margins = np.hstack([X[unlab], np.ones((n_unlab, 1))]) @ w
        cut = np.quantile(np.abs(margins), 0.9)
        confident = np.abs(margins) > cut
        X_fit = np.vstack([X[lab], X[unlab][confident]])
        y_fit = np.hstack([y[lab], np.sign(margins[confident])])
    else:
        X_fit, y_fit = X, y
    w, alpha, primal, dual = _dual_cd(X_fit, y_fit, c, tol, max_epochs, rng)
    gap = primal - dual
    if gap > 1e-2:
        warnings.warn(f"duality gap {gap:.4f} > 1e-2 at exit", ConvergenceWarning)
    return FittedModel(
        algorithm="fast_large_margin",
        feature_names=train.feature_names,
        hyperparameters={"c": c, "tol": tol, "max_epochs": max_epochs,
                         "self_training": self_training,
                         "unlabeled_fraction": unlabeled_fraction, "seed": seed},
        params=FlmParams(weights=w, primal_objective=primal,
                         dual_objective=dual),
        kind=MARGIN,
    )


register("svc", SvcParams)
register("fast_large_margin", FlmParams)
