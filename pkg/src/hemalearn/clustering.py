"""Clustering algorithms: k-means (+ elbow), agglomerative hierarchies,
Gaussian mixtures via EM, and spectral clustering on an embedding."""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ComputationError, ConvergenceWarning, DataWarning, ParameterError
from .linalg import jacobi_eigh

LINKAGES = ("ward", "complete", "average")


# ---------------------------------------------------------------------------
# k-means


@dataclass(frozen=True)
class KmeansResult:
    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    iterations: int
    inertia_trace: tuple


def _sq_dists_to(points, centers):
    pp = (points ** 2).sum(axis=1)[:, None]
    cc = (centers ** 2).sum(axis=1)[None, :]
    return np.maximum(pp + cc - 2.0 * points @ centers.T, 0.0)


def _kmeanspp_init(points, k, rng):
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    first = int(rng.integers(n))
    centers[0] = points[first]
    closest = _sq_dists_to(points, centers[:1])[:, 0]
    for j in range(1, k):
        total = closest.sum()
        if total <= 0:
            # All remaining mass on existing centers; pick any uncovered point.
            idx = int(rng.integers(n))
        else:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(closest), r, side="right"))
            idx = min(idx, n - 1)
        centers[j] = points[idx]
        closest = np.minimum(closest, _sq_dists_to(points, centers[j:j + 1])[:, 0])
    return centers


def _lloyd(points, centers, max_iter, tol):
    trace = []
    n, _ = points.shape
    k = centers.shape[0]
    assignments = None
    for it in range(1, max_iter + 1):
        d2 = _sq_dists_to(points, centers)
        assignments = np.argmin(d2, axis=1)
        own = d2[np.arange(n), assignments]
        # Re-seed empty clusters to the point farthest from its centroid.
        counts = np.bincount(assignments, minlength=k)
        if (counts == 0).any():
            own_work = own.copy()
            for c in np.flatnonzero(counts == 0):
                far = int(np.argmax(own_work))
                centers[c] = points[far]
                own_work[far] = 0.0
            d2 = _sq_dists_to(points, centers)
            assignments = np.argmin(d2, axis=1)
            own = d2[np.arange(n), assignments]
        trace.append(float(own.sum()))
        new_centers = centers.copy()
        for c in range(k):
            members = assignments == c
            if members.any():
                new_centers[c] = points[members].mean(axis=0)
        shift = np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max()
        centers = new_centers
        if shift < tol:
            break
    d2 = _sq_dists_to(points, centers)
    assignments = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(n), assignments].sum())
    trace.append(inertia)
    return centers, assignments, inertia, it, trace


def fit_kmeans(points, k: int, seed: int, max_iter: int = 300, tol: float = 1e-4,
               n_init: int = 1, init_centers=None) -> KmeansResult:
    """Lloyd iterations from k-means++ starts; best of ``n_init`` runs."""
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ParameterError(f"k must be in [1, {n}], got {k}")
    seeds = np.random.SeedSequence(seed).spawn(n_init)
    best = None
    for s in seeds:
        rng = np.random.default_rng(s)
        centers = _kmeanspp_init(points, k, rng)
        result = _lloyd(points, centers.copy(), max_iter, tol)
        if best is None or result[2] < best[2]:
            best = result
    if init_centers is not None:
        centers = np.asarray(init_centers, dtype=np.float64).copy()
        if centers.shape != (k, points.shape[1]):
            raise ParameterError("init_centers shape mismatch")
        result = _lloyd(points, centers, max_iter, tol)
        if result[2] < best[2]:
            best = result
    centers, assignments, inertia, iterations, trace = best
    return KmeansResult(centroids=centers, assignments=assignments,
                        inertia=inertia, iterations=iterations,
                        inertia_trace=tuple(trace))


def elbow_curve(points, k_range, seed: int, n_init: int = 10):
    """(k, inertia) pairs; each k is the best of seeded restarts plus a
    warm start built from the previous k's solution, which keeps the curve
    nonincreasing."""
    points = np.asarray(points, dtype=np.float64)
    out = []
    prev = None
    for k in k_range:
        warm = None
        if prev is not None and prev.centroids.shape[0] == k - 1:
            d2 = _sq_dists_to(points, prev.centroids).min(axis=1)
            far = int(np.argmax(d2))
            warm = np.vstack([prev.centroids, points[far:far + 1]])
        result = fit_kmeans(points, k, seed=seed + k, n_init=n_init,
                            init_centers=warm)
        out.append((k, result.inertia))
        prev = result
    return out


# ---------------------------------------------------------------------------
# agglomerative hierarchical clustering


@dataclass(frozen=True)
class MergeTree:
    merges: tuple   # (left_id, right_id, distance, new_size) per merge
    linkage: str

    def to_json_list(self):
        return [{"left": int(l), "right": int(r), "distance": float(d),
                 "size": int(s)} for l, r, d, s in self.merges]


def _lance_williams(linkage, d_ik, d_jk, d_ij, si, sj, sk):
    if linkage == "average":
        return (si * d_ik + sj * d_jk) / (si + sj)
    if linkage == "complete":
        return np.maximum(d_ik, d_jk)
    # ward, on plain Euclidean distances via the squared-distance recurrence
    t = si + sj + sk
    sq = ((si + sk) * d_ik ** 2 + (sj + sk) * d_jk ** 2 - sk * d_ij ** 2) / t
    return np.sqrt(np.maximum(sq, 0.0))


def fit_agglomerative(points, linkage: str, k: int):
    """Full merge tree by greedy nearest-pair agglomeration with
    Lance-Williams updates, plus the k-cluster cut assignments.

    Ties in the minimum pair distance merge the lowest index pair. A
    cached per-row nearest neighbor keeps the greedy scan near O(n^2).
    """
    if linkage not in LINKAGES:
        raise ParameterError(f"linkage must be one of {LINKAGES}")
    X = np.asarray(points, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise ParameterError("need at least 2 points")
    if not 1 <= k <= n:
        raise ParameterError(f"k must be in [1, {n}], got {k}")
    if X.std(axis=0).max() > 10.0 or np.abs(X.mean(axis=0)).max() > 10.0:
        warnings.warn("input does not look standardized; linkage distances "
                      "may be dominated by one feature", DataWarning)

    D = np.sqrt(_sq_dists_to(X, X))
    np.fill_diagonal(D, np.inf)
    active = np.ones(n, dtype=bool)
    sizes = np.ones(n, dtype=np.int64)
    labels = np.arange(n)           # dendrogram node id held by each slot
    members = [[i] for i in range(n)]

    # nn[i] = best partner j > i; nndist[i] = that distance
    nn = np.full(n, -1, dtype=np.int64)
    nndist = np.full(n, np.inf)

    def recompute(i):
        row = D[i, i + 1:]
        if row.size == 0 or not active[i + 1:].any():
            nn[i], nndist[i] = -1, np.inf
            return
        masked = np.where(active[i + 1:], row, np.inf)
        j = int(np.argmin(masked))
        nn[i] = i + 1 + j
        nndist[i] = masked[j]

    for i in range(n):
        recompute(i)

    merges = []
    cut_assignments = None
    next_id = n
    for step in range(n - 1):
        i = int(np.argmin(nndist))
        j = int(nn[i])
        dist = float(nndist[i])
        si, sj = sizes[i], sizes[j]
        merges.append((int(labels[i]), int(labels[j]), dist, int(si + sj)))

        others = active.copy()
        others[i] = others[j] = False
        idx = np.flatnonzero(others)
        if idx.size:
            D[i, idx] = _lance_williams(linkage, D[i, idx], D[j, idx], dist,
                                        si, sj, sizes[idx])
            D[idx, i] = D[i, idx]
        D[i, j] = D[j, i] = np.inf
        D[j, idx] = D[idx, j] = np.inf

        active[j] = False
        sizes[i] = si + sj
        labels[i] = next_id
        next_id += 1
        members[i] = members[i] + members[j]
        members[j] = []

        nndist[j] = np.inf
        nn[j] = -1
        recompute(i)
        for r in range(i):
            if not active[r]:
                continue
            if nn[r] == j or nn[r] == i:
                recompute(r)
            elif D[r, i] < nndist[r]:
                nn[r], nndist[r] = i, D[r, i]

        if n - (step + 1) == k:
            alive = np.flatnonzero(active)
            order = sorted(alive, key=lambda s: min(members[s]))
            cut_assignments = np.empty(n, dtype=np.int64)
            for cid, slot in enumerate(order):
                cut_assignments[members[slot]] = cid
    if cut_assignments is None:  # k == n
        cut_assignments = np.arange(n, dtype=np.int64)
    return MergeTree(merges=tuple(merges), linkage=linkage), cut_assignments


# ---------------------------------------------------------------------------
# Gaussian mixture via EM


@dataclass(frozen=True)
class GmmParams:
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    log_likelihood_trace: tuple = field(default_factory=tuple)

    @property
    def k(self) -> int:
        return self.weights.size


def _mixture_log_parts(X, weights, means, covariances):
    n, d = X.shape
    k = weights.size
    parts = np.empty((n, k))
    for j in range(k):
        chol = np.linalg.cholesky(covariances[j])
        diff = X - means[j]
        sol = np.linalg.solve(chol, diff.T)
        maha = (sol ** 2).sum(axis=0)
        logdet = 2.0 * np.sum(np.log(np.diag(chol)))
        parts[:, j] = np.log(weights[j]) - 0.5 * (d * np.log(2 * np.pi) + logdet + maha)
    return parts


def _em_once(X, k, seed, max_iter, tol, cov_floor):
    n, d = X.shape
    km = fit_kmeans(X, k, seed=seed, max_iter=100, tol=1e-4, n_init=3)
    weights = np.bincount(km.assignments, minlength=k).astype(np.float64)
    weights = np.maximum(weights, 1.0)
    weights /= weights.sum()
    means = km.centroids.copy()
    covariances = np.empty((k, d, d))
    for j in range(k):
        mem = X[km.assignments == j]
        if mem.shape[0] < 2:
            covariances[j] = np.eye(d)
        else:
            diff = mem - mem.mean(axis=0)
            covariances[j] = diff.T @ diff / mem.shape[0]
        covariances[j][np.diag_indices(d)] += cov_floor

    trace = []
    for _ in range(max_iter):
        parts = _mixture_log_parts(X, weights, means, covariances)
        top = parts.max(axis=1)
        log_norm = top + np.log(np.exp(parts - top[:, None]).sum(axis=1))
        trace.append(float(log_norm.sum()))
        resp = np.exp(parts - log_norm[:, None])

        nk = resp.sum(axis=0)
        if (nk / n < 1e-8).any():
            return None, None, trace
        weights = nk / n
        means = (resp.T @ X) / nk[:, None]
        for j in range(k):
            diff = X - means[j]
            covariances[j] = (resp[:, j][:, None] * diff).T @ diff / nk[j]
            covariances[j][np.diag_indices(d)] += cov_floor
        if len(trace) >= 2 and abs(trace[-1] - trace[-2]) < tol:
            break
    parts = _mixture_log_parts(X, weights, means, covariances)
    assignments = np.argmax(parts, axis=1)
    params = GmmParams(weights=weights, means=means, covariances=covariances,
                       log_likelihood_trace=tuple(trace))
    return params, assignments, trace


def fit_gmm(points, k: int, seed: int, max_iter: int = 200, tol: float = 1e-6,
            cov_floor: float = 1e-6):
    """EM with full covariances initialized from a k-means run.

    A component collapsing below weight 1e-8 triggers one reinitialization
    with a derived seed; a second collapse is an error.
    """
    X = np.asarray(points, dtype=np.float64)
    n, d = X.shape
    if not 1 <= k <= n:
        raise ParameterError(f"k must be in [1, {n}], got {k}")
    params, assignments, _ = _em_once(X, k, seed, max_iter, tol, cov_floor)
    if params is None:
        warnings.warn("degenerate mixture component; reinitializing once",
                      ConvergenceWarning)
        params, assignments, _ = _em_once(X, k, seed + 104729, max_iter, tol,
                                          cov_floor)
        if params is None:
            raise ComputationError("mixture collapsed twice; aborting")
    return params, assignments


# ---------------------------------------------------------------------------
# spectral clustering


@dataclass(frozen=True)
class SpectralConfig:
    affinity: str = "rbf"            # "rbf" | "nearest-neighbors"
    gamma: float = None              # None: 1 / (d * mean feature variance)
    n_neighbors: int = 10
    n_clusters: int = 2
    pca_components: int = 2

    def __post_init__(self):
        if self.affinity not in ("rbf", "nearest-neighbors"):
            raise ParameterError(f"unknown affinity {self.affinity!r}")
        if self.gamma is not None and self.gamma <= 0:
            raise ParameterError("gamma must be positive")
        if self.n_neighbors < 1 or self.n_clusters < 1 or self.pca_components < 1:
            raise ParameterError("spectral parameters must be positive")


def affinity_matrix(points, cfg: SpectralConfig):
    X = np.asarray(points, dtype=np.float64)
    n, d = X.shape
    d2 = _sq_dists_to(X, X)
    if cfg.affinity == "rbf":
        gamma = cfg.gamma
        if gamma is None:
            mean_var = X.var(axis=0).mean()
            gamma = 1.0 / (d * mean_var) if mean_var > 0 else 1.0
        return np.exp(-gamma * d2)
    m = min(cfg.n_neighbors, n - 1)
    np.fill_diagonal(d2, np.inf)
    A = np.zeros((n, n))
    # argsort is stable, so equal distances resolve to the lower index
    nearest = np.argsort(d2, axis=1, kind="stable")[:, :m]
    rows = np.repeat(np.arange(n), m)
    A[rows, nearest.ravel()] = 1.0
    return np.maximum(A, A.T)


def fit_spectral(points, cfg: SpectralConfig, seed: int):
    """Normalized-Laplacian spectral partition of already-embedded points.

    Builds the configured affinity, takes the bottom eigenvectors of
    I - D^{-1/2} A D^{-1/2}, row-normalizes them and k-means them.
    """
    X = np.asarray(points, dtype=np.float64)
    A = affinity_matrix(X, cfg)
    deg = A.sum(axis=1)
    isolated = deg <= 0
    if isolated.any():
        deg = np.where(isolated, 1.0, deg)
    inv_sqrt = 1.0 / np.sqrt(deg)
    L = np.eye(X.shape[0]) - A * inv_sqrt[:, None] * inv_sqrt[None, :]
    eigvals, eigvecs = jacobi_eigh(L)
    k = cfg.n_clusters
    n_components = int(np.sum(eigvals < 1e-8))
    if n_components > k:
        warnings.warn(f"affinity graph has ~{n_components} components for "
                      f"k={k}; eigenvectors encode the components", DataWarning)
    emb = eigvecs[:, -k:]
    norms = np.linalg.norm(emb, axis=1, keepdims=True)
    emb = np.where(norms > 0, emb / np.where(norms == 0, 1.0, norms), emb)
    km = fit_kmeans(emb, k, seed=seed, n_init=5)
    return km.assignments
