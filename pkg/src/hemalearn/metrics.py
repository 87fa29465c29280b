"""Evaluation measures: confusion scores, ROC/AUC, silhouette, mixture
log-likelihood, BIC, and cluster-to-label alignment."""

import warnings
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import ComputationError, DataWarning, MetricError


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def correct(self) -> int:
        return self.tp + self.tn

    def to_json_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass(frozen=True)
class ScoreSet:
    accuracy: float
    precision: float
    recall: float
    f1: float

    def as_dict(self) -> dict:
        return {"accuracy": self.accuracy, "precision": self.precision,
                "recall": self.recall, "f1": self.f1}


def confusion(pred, truth) -> ConfusionMatrix:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise MetricError(f"shape mismatch: pred {pred.shape} vs truth {truth.shape}")
    for name, v in (("pred", pred), ("truth", truth)):
        if not np.isin(v, (0, 1)).all():
            raise MetricError(f"{name} labels must be in {{0,1}}")
    tp = int(np.sum((pred == 1) & (truth == 1)))
    fp = int(np.sum((pred == 1) & (truth == 0)))
    tn = int(np.sum((pred == 0) & (truth == 0)))
    fn = int(np.sum((pred == 0) & (truth == 1)))
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


def scores(cm: ConfusionMatrix) -> ScoreSet:
    """Accuracy, precision, recall and F1 from raw counts.

    Zero-denominator precision/recall are defined as 0 (with a warning) so
    report tables stay total.
    """
    if cm.total == 0:
        raise MetricError("empty confusion matrix")
    accuracy = (cm.tp + cm.tn) / cm.total
    if cm.tp + cm.fp == 0:
        warnings.warn("no positive predictions: precision defined as 0", DataWarning)
        precision = 0.0
    else:
        precision = cm.tp / (cm.tp + cm.fp)
    if cm.tp + cm.fn == 0:
        warnings.warn("no positive samples: recall defined as 0", DataWarning)
        recall = 0.0
    else:
        recall = cm.tp / (cm.tp + cm.fn)
    denom = 2 * cm.tp + cm.fp + cm.fn
    f1 = 2 * cm.tp / denom if denom > 0 else 0.0
    return ScoreSet(accuracy=accuracy, precision=precision, recall=recall, f1=f1)


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    def write_csv(self, path) -> None:
        import csv
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["fpr", "tpr", "threshold"])
            for f, t, th in zip(self.fpr, self.tpr, self.thresholds):
                writer.writerow([repr(float(f)), repr(float(t)), repr(float(th))])


def roc_auc(score, truth) -> RocCurve:
    """ROC curve from sweeping thresholds over distinct scores.

    Equal scores collapse into a single threshold step; AUC is the
    trapezoid-rule area, which makes tied scores count as half-ordered.
    """
    score = np.asarray(score, dtype=np.float64)
    truth = np.asarray(truth)
    if score.shape != truth.shape or score.ndim != 1:
        raise MetricError("score and truth must be equal-length vectors")
    n_pos = int(np.sum(truth == 1))
    n_neg = int(np.sum(truth == 0))
    if n_pos == 0 or n_neg == 0:
        raise MetricError("ROC needs both classes present")
    order = np.argsort(-score, kind="stable")
    s = score[order]
    t = truth[order]
    # Keep only the last index of each tied-score group.
    distinct = np.flatnonzero(np.diff(s) != 0)
    cut = np.concatenate([distinct, [s.size - 1]])
    tp = np.cumsum(t == 1)[cut]
    fp = np.cumsum(t == 0)[cut]
    tpr = np.concatenate([[0.0], tp / n_pos])
    fpr = np.concatenate([[0.0], fp / n_neg])
    thresholds = np.concatenate([[np.inf], s[cut]])
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=thresholds, auc=auc)


@dataclass(frozen=True)
class ClusterLabelMap:
    mapping: dict          # cluster id -> class label
    score_set: ScoreSet
    mapped_labels: np.ndarray


def align_clusters(assignments, truth) -> ClusterLabelMap:
    """Map cluster ids to class labels by the accuracy-maximizing bijection.

    With binary truth only one or two clusters admit a bijection; ties
    prefer the identity-like mapping (lowest cluster id -> label 0).
    """
    assignments = np.asarray(assignments)
    truth = np.asarray(truth)
    if assignments.shape != truth.shape:
        raise MetricError("assignments and truth must align")
    ids = np.unique(assignments)
    if ids.size == 0:
        raise MetricError("no clusters")
    if ids.size > 2:
        raise MetricError("alignment to a binary label needs at most 2 clusters")
    candidates = []
    if ids.size == 1:
        candidates = [{int(ids[0]): 0}, {int(ids[0]): 1}]
    else:
        for labels in permutations((0, 1)):
            candidates.append({int(c): l for c, l in zip(ids, labels)})
    best = None
    for mapping in candidates:
        mapped = np.array([mapping[int(c)] for c in assignments])
        acc = float(np.mean(mapped == truth))
        if best is None or acc > best[0]:
            best = (acc, mapping, mapped)
    _, mapping, mapped = best
    return ClusterLabelMap(mapping=mapping,
                           score_set=scores(confusion(mapped, truth)),
                           mapped_labels=mapped)


def _pairwise_sq_dists(A, B):
    aa = (A ** 2).sum(axis=1)[:, None]
    bb = (B ** 2).sum(axis=1)[None, :]
    return np.maximum(aa + bb - 2.0 * (A @ B.T), 0.0)


def silhouette(points, assignments, chunk: int = 512):
    """Per-point silhouette values and their mean (Euclidean distance).

    A point's cohesion is the mean distance to the other members of its
    cluster, separation the smallest mean distance to another cluster.
    Singleton-cluster points score 0 by convention.
    """
    X = np.asarray(points, dtype=np.float64)
    assignments = np.asarray(assignments)
    if X.shape[0] != assignments.shape[0]:
        raise MetricError("points and assignments must align")
    ids = np.unique(assignments)
    if ids.size < 2:
        raise MetricError("silhouette needs at least 2 clusters")
    sizes = {int(c): int(np.sum(assignments == c)) for c in ids}
    n = X.shape[0]
    values = np.zeros(n)
    members = {int(c): np.flatnonzero(assignments == c) for c in ids}
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        block = X[start:stop]
        own = assignments[start:stop]
        mean_dist = np.empty((stop - start, ids.size))
        for ci, c in enumerate(ids):
            D = np.sqrt(_pairwise_sq_dists(block, X[members[int(c)]]))
            mean_dist[:, ci] = D.mean(axis=1)
        for r in range(stop - start):
            c = int(own[r])
            ci = int(np.flatnonzero(ids == c)[0])
            size = sizes[c]
            if size == 1:
                values[start + r] = 0.0
                continue
            # Remove the point's own zero distance from the within mean.
            a = mean_dist[r, ci] * size / (size - 1)
            b = np.min(np.delete(mean_dist[r], ci))
            denom = max(a, b)
            values[start + r] = 0.0 if denom == 0 else (b - a) / denom
    return values, float(values.mean())


def gaussian_log_likelihood(points, weights, means, covariances) -> float:
    """Total log-likelihood of points under a full-covariance Gaussian mixture.

    Raises ComputationError on a non-positive-definite covariance rather
    than regularizing silently.
    """
    X = np.asarray(points, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if abs(weights.sum() - 1.0) > 1e-9:
        raise ComputationError("mixture weights must sum to 1")
    k = weights.size
    n, d = X.shape
    log_parts = np.empty((n, k))
    for j in range(k):
        cov = np.asarray(covariances[j], dtype=np.float64)
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ComputationError(f"component {j}: covariance not positive definite")
        diff = X - np.asarray(means[j])
        sol = np.linalg.solve(chol, diff.T)
        maha = (sol ** 2).sum(axis=0)
        logdet = 2.0 * np.sum(np.log(np.diag(chol)))
        log_parts[:, j] = (np.log(weights[j]) - 0.5 * (d * np.log(2.0 * np.pi)
                                                       + logdet + maha))
    top = log_parts.max(axis=1)
    return float(np.sum(top + np.log(np.exp(log_parts - top[:, None]).sum(axis=1))))


def bic(loglik_max: float, n_params: int, n_samples: int) -> float:
    """r*ln(q) - 2*ln(M) with ln(M) taken as the maximized log-likelihood."""
    if n_samples <= 0 or n_params <= 0:
        raise MetricError("BIC needs positive sample and parameter counts")
    return n_params * np.log(n_samples) - 2.0 * loglik_max


def gmm_param_count(k: int, d: int) -> int:
    """Free parameters of a k-component full-covariance mixture in d dims."""
    return int(k - 1 + k * d + k * d * (d + 1) // 2)
