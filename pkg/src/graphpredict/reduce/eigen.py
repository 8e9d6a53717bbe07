"""Full symmetric eigendecomposition by cyclic Jacobi rotations.

Correctness over speed: desk-scale matrices only.  The inner sweep is
JIT-compiled so the acceptance-scale batches stay fast.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..errors import ValidationError


@njit(cache=True)
def _jacobi_kernel(A, tol, max_sweeps):
    n = A.shape[0]
    V = np.eye(n)
    norm = 0.0
    for i in range(n):
        for j in range(n):
            norm += A[i, j] * A[i, j]
    norm = np.sqrt(norm)
    if norm == 0.0:
        return A, V
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                off += 2.0 * A[i, j] * A[i, j]
        if np.sqrt(off) <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
    return A, V


def symmetric_eigen(matrix, tol: float = 1e-12, max_sweeps: int = 100):
    """(eigenvalues descending, orthonormal eigenvector columns)."""
    A = np.array(matrix, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"matrix must be square, got shape {A.shape}")
    dev = float(np.max(np.abs(A - A.T))) if A.size else 0.0
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if dev > 1e-8 * scale:
        raise ValidationError(
            f"matrix not symmetric: max |A - A^T| = {dev:.3e}")
    A = (A + A.T) / 2.0
    D, V = _jacobi_kernel(A, tol, max_sweeps)
    w = np.diag(D).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]
