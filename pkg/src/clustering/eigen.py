"""
Dense symmetric eigensolvers.

`eigensolve_symmetric` wraps numpy's LAPACK driver; `jacobi_eigensolve` is an
independent cyclic Jacobi implementation used to cross-check it. Both return
ascending eigenvalues and apply the same sign convention: the first component
of each eigenvector whose magnitude exceeds SIGN_TOLERANCE is positive.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from src.utils.errors import ConfigError, NumericalError, ShapeError

SYMMETRY_TOLERANCE = 1e-10
SIGN_TOLERANCE = 1e-12


class EigenPairs(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def _check_symmetric(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError(f"Expected a square matrix, got shape {M.shape}")
    if not np.isfinite(M).all():
        raise NumericalError("Matrix contains NaN or Inf")
    asymmetry = np.abs(M - M.T).max() if M.size else 0.0
    if asymmetry > SYMMETRY_TOLERANCE:
        raise ShapeError(f"Matrix is not symmetric: max |M - M^T| = {asymmetry:.3e}")
    return M


def _check_k(k: int, n: int) -> None:
    if not 1 <= k <= n:
        raise ConfigError(f"Requested {k} eigenpairs from a {n} x {n} matrix")


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    vectors = vectors.copy()
    for j in range(vectors.shape[1]):
        column = vectors[:, j]
        significant = np.flatnonzero(np.abs(column) > SIGN_TOLERANCE)
        if significant.size and column[significant[0]] < 0:
            vectors[:, j] = -column
    return vectors


def eigensolve_symmetric(M: np.ndarray, k: int) -> EigenPairs:
    """
    The k smallest eigenpairs of a symmetric matrix.

    Raises:
        ShapeError: M is not square or not symmetric within 1e-10.
        ConfigError: k outside [1, n].
    """
    M = _check_symmetric(M)
    _check_k(k, M.shape[0])
    values, vectors = np.linalg.eigh(0.5 * (M + M.T))
    return EigenPairs(values[:k].copy(), fix_signs(vectors[:, :k]))


def jacobi_eigensolve(M: np.ndarray, k: int, max_sweeps: int = 100) -> EigenPairs:
    """
    The k smallest eigenpairs by cyclic Jacobi rotations.

    Each rotation zeroes one off-diagonal pair; sweeps repeat until the
    off-diagonal Frobenius norm falls below 1e-15 of the matrix norm.

    Raises:
        NumericalError: no convergence within `max_sweeps`.
    """
    M = _check_symmetric(M)
    n = M.shape[0]
    _check_k(k, n)
    A = 0.5 * (M + M.T)
    V = np.eye(n)
    scale = max(np.linalg.norm(A), np.finfo(float).tiny)

    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p, col_q = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p, row_q = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0

                vec_p, vec_q = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vec_p - s * vec_q
                V[:, q] = s * vec_p + c * vec_q
    else:
        off = np.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
        if off > 1e-12 * scale:
            raise NumericalError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps (off={off:.3e})")

    values = np.diag(A).copy()
    order = np.argsort(values, kind="stable")[:k]
    return EigenPairs(values[order], fix_signs(V[:, order]))


EIGENSOLVERS = {"eigh": eigensolve_symmetric, "jacobi": jacobi_eigensolve}


__all__ = ["EigenPairs", "eigensolve_symmetric", "jacobi_eigensolve", "fix_signs", "EIGENSOLVERS"]
