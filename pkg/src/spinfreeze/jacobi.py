"""Cyclic Jacobi eigensolver for dense real symmetric matrices."""

from __future__ import annotations

import numpy as np

from .errors import NumericalError

MAX_SWEEPS = 100
REL_TOL = 1e-14


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def jacobi_eigh(
    matrix: np.ndarray, max_sweeps: int = MAX_SWEEPS, rel_tol: float = REL_TOL
) -> tuple[np.ndarray, np.ndarray, int]:
    """Diagonalise a real symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    matrix : (n, n) array_like
        Real symmetric input.  Not modified.
    max_sweeps : int
        Iteration budget, counted in full sweeps over the upper triangle.
    rel_tol : float
        Stop once the Frobenius norm of the off-diagonal part drops to
        ``rel_tol * ||matrix||_F``.

    Returns
    -------
    eigenvalues : (n,) ndarray
        Unsorted diagonal of the rotated matrix.
    eigenvectors : (n, n) ndarray
        Orthogonal matrix, column ``k`` pairs with ``eigenvalues[k]``.
    sweeps : int
        Number of sweeps used.

    Raises
    ------
    NumericalError
        If the budget is exhausted; carries the remaining off-diagonal norm.
    """
    a = np.array(matrix, dtype=float, copy=True)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    v = np.eye(n)
    scale = float(np.linalg.norm(a))
    threshold = rel_tol * scale
    if n < 2 or scale == 0.0:
        return np.diag(a).copy(), v, 0

    for sweep in range(max_sweeps):
        if _off_norm(a) <= threshold:
            return np.diag(a).copy(), v, sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                # Entry already negligible against both diagonals: zero it.
                if abs(apq) < 1e-300 or (
                    abs(a[p, p]) + abs(apq) * 1e18 == abs(a[p, p])
                    and abs(a[q, q]) + abs(apq) * 1e18 == abs(a[q, q])
                ):
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq

    off = _off_norm(a)
    if off <= threshold:
        return np.diag(a).copy(), v, max_sweeps
    raise NumericalError(f"Jacobi did not converge in {max_sweeps} sweeps", residual=off)
