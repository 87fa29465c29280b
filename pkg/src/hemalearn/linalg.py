"""Symmetric eigensolver shared by PCA and spectral clustering.

Cyclic Jacobi rotations: simple, deterministic, and accurate for the
matrix sizes this package deals with (feature covariances at d <= 11,
subsampled graph Laplacians up to ~1500 nodes). The rotation sweep is
compiled with numba when available; the pure-Python path is identical
but slow above a few hundred rows.
"""

import warnings

import numpy as np

from .errors import ConvergenceWarning

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None


def _jacobi_sweeps(a, v, tol, max_sweeps):
    n = a.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += a[i, j] * a[i, j]
        if np.sqrt(2.0 * off) <= tol:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    return max_sweeps


if njit is not None:
    _jacobi_sweeps_fast = njit(cache=True)(_jacobi_sweeps)
else:  # pragma: no cover
    _jacobi_sweeps_fast = _jacobi_sweeps


def jacobi_eigh(matrix: np.ndarray, max_sweeps: int = 60):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors) sorted by descending eigenvalue,
    eigenvectors in columns. Convergence: off-diagonal Frobenius norm below
    1e-12 times the Frobenius norm of the input.
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("jacobi_eigh expects a square matrix")
    if not np.allclose(a, a.T, atol=1e-10):
        raise ValueError("jacobi_eigh expects a symmetric matrix")
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    v = np.eye(n)
    fro = np.linalg.norm(a)
    tol = 1e-12 * fro if fro > 0 else 1e-300
    used = _jacobi_sweeps_fast(a, v, tol, max_sweeps)
    if used >= max_sweeps:
        off = np.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2))
        if off > tol:
            warnings.warn(
                f"jacobi_eigh stopped after {max_sweeps} sweeps "
                f"(off-diagonal {off:.3e} > tol {tol:.3e})",
                ConvergenceWarning,
            )
    eigvals = np.diag(a).copy()
    order = np.argsort(-eigvals, kind="stable")
    return eigvals[order], v[:, order]
