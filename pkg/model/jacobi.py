"""
jacobi.py

Cyclic Jacobi eigenvalue iteration for stacks of small real symmetric
matrices.

The stack is held batch-last, shape (n, n, B), so every row/column rotation
is a contiguous vectorized NumPy operation. Only matrices that have not yet
converged are rotated, and every arithmetic step on a matrix depends on that
matrix alone, so results do not depend on how matrices are batched together.

Off-diagonal entries already below tol * ||M||_F / n are left alone (threshold
Jacobi); a rotation skipped for one matrix is an exact identity, never a
rounding of it.

``jacobi_eigh`` accumulates the rotations into eigenvectors and accepts a
starting basis, so a slowly varying sequence of matrices (a matrix path on a
fine time grid) can be diagonalized from the previous step's eigenvectors in
one or two sweeps.
"""

from typing import Optional, Tuple

import numpy as np

from config.settings import JACOBI_MAX_SWEEPS, JACOBI_TOLERANCE
from model.errors import ArgumentError, ConvergenceError


def _sum_of_squares(A: np.ndarray, pairs) -> np.ndarray:
    # Fixed accumulation order per matrix
    total = np.zeros(A.shape[-1])
    for p, q in pairs:
        total = total + A[p, q] * A[p, q]
    return total


def _rotate(A: np.ndarray, V: Optional[np.ndarray], p: int, q: int, floor: np.ndarray) -> None:
    apq = A[p, q].copy()
    rotating = np.abs(apq) > floor
    if not rotating.any():
        return
    app = A[p, p].copy()
    aqq = A[q, q].copy()

    safe_apq = np.where(rotating, apq, 1.0)
    with np.errstate(over="ignore"):
        theta = (aqq - app) / (2.0 * safe_apq)
    # theta^2 overflows past 1e154; there t -> 1 / (2 theta)
    big = np.abs(theta) > 1e150
    tame = np.where(big, 1.0, theta)
    t = np.where(
        big,
        0.5 / np.where(big, theta, 1.0),
        np.sign(tame) / (np.abs(tame) + np.sqrt(tame * tame + 1.0)),
    )
    t = np.where(theta == 0.0, 1.0, t)
    t = np.where(rotating, t, 0.0)
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c

    col_p = A[:, p].copy()
    col_q = A[:, q].copy()
    A[:, p] = c * col_p - s * col_q
    A[:, q] = s * col_p + c * col_q

    row_p = A[p].copy()
    row_q = A[q].copy()
    A[p] = c * row_p - s * row_q
    A[q] = s * row_p + c * row_q

    A[p, p] = app - t * apq
    A[q, q] = aqq + t * apq
    A[p, q] = np.where(rotating, 0.0, apq)
    A[q, p] = A[p, q]

    if V is not None:
        vec_p = V[:, p].copy()
        vec_q = V[:, q].copy()
        V[:, p] = c * vec_p - s * vec_q
        V[:, q] = s * vec_p + c * vec_q


def _as_stack(matrices: np.ndarray) -> Tuple[np.ndarray, Tuple[int, ...], int]:
    M = np.asarray(matrices, dtype=float)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise ArgumentError(f"Expected a stack of square matrices, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ArgumentError("Matrix entries must be finite")
    n = M.shape[-1]
    return M.reshape((-1, n, n)), M.shape[:-2], n


def _diagonalize(A: np.ndarray, V: Optional[np.ndarray], tol: float, max_sweeps: int) -> None:
    """Rotate the batch-last stack A (and V) in place until every matrix converges."""
    n = A.shape[0]
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]
    diag_sq = np.zeros(A.shape[-1])
    for i in range(n):
        diag_sq = diag_sq + A[i, i] * A[i, i]
    norm_sq = diag_sq + 2.0 * _sum_of_squares(A, pairs)
    threshold = (tol * tol) * norm_sq
    floor = tol * np.sqrt(norm_sq) / n

    active = np.flatnonzero(2.0 * _sum_of_squares(A, pairs) > threshold)
    sweeps = 0
    while active.size and sweeps < max_sweeps:
        block = A[:, :, active]
        vectors = V[:, :, active] if V is not None else None
        block_floor = floor[active]
        for p, q in pairs:
            _rotate(block, vectors, p, q, block_floor)
        A[:, :, active] = block
        if V is not None:
            V[:, :, active] = vectors
        sweeps += 1

        off = 2.0 * _sum_of_squares(block, pairs)
        active = active[off > threshold[active]]

    if active.size:
        raise ConvergenceError(
            f"Jacobi iteration: {active.size} matrices unconverged after {max_sweeps} sweeps"
        )


def jacobi_eigenvalues(
    matrices: np.ndarray,
    tol: float = JACOBI_TOLERANCE,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> np.ndarray:
    """
    Eigenvalues of each symmetric matrix in a stack, sorted ascending.

    A matrix has converged when its off-diagonal Frobenius norm falls
    below tol * ||M||_F.

    Args:
        matrices (np.ndarray): Shape (..., n, n), symmetric
        tol (float): Relative off-diagonal tolerance
        max_sweeps (int): Cyclic sweeps allowed

    Returns:
        np.ndarray: Shape (..., n)

    Raises:
        ConvergenceError: If any matrix is still unconverged after max_sweeps
    """
    stack, lead, n = _as_stack(matrices)
    A = np.moveaxis(stack, 0, -1).copy()
    _diagonalize(A, None, tol, max_sweeps)
    eigenvalues = np.sort(np.diagonal(A, axis1=0, axis2=1), axis=1)
    return eigenvalues.reshape(lead + (n,))


def jacobi_eigh(
    matrices: np.ndarray,
    basis: Optional[np.ndarray] = None,
    tol: float = JACOBI_TOLERANCE,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigenvalues and eigenvectors of each symmetric matrix in a stack.

    With ``basis`` (orthogonal, one per matrix) the iteration starts from
    basis^T M basis, which is nearly diagonal when basis holds the
    eigenvectors of a nearby matrix.

    Args:
        matrices (np.ndarray): Shape (..., n, n), symmetric
        basis (np.ndarray, optional): Starting orthogonal matrices, same shape
        tol (float): Relative off-diagonal tolerance
        max_sweeps (int): Cyclic sweeps allowed

    Returns:
        Tuple[np.ndarray, np.ndarray]: eigenvalues (..., n) ascending and
        eigenvectors (..., n, n) as matching columns

    Raises:
        ConvergenceError: If any matrix is still unconverged after max_sweeps
    """
    stack, lead, n = _as_stack(matrices)
    if basis is None:
        start = np.broadcast_to(np.eye(n), stack.shape)
    else:
        start = np.asarray(basis, dtype=float).reshape(stack.shape)
        stack = np.swapaxes(start, -1, -2) @ stack @ start
        stack = 0.5 * (stack + np.swapaxes(stack, -1, -2))

    A = np.moveaxis(stack, 0, -1).copy()
    V = np.moveaxis(start, 0, -1).copy()
    _diagonalize(A, V, tol, max_sweeps)

    diagonal = np.diagonal(A, axis1=0, axis2=1)
    order = np.argsort(diagonal, axis=1, kind="stable")
    eigenvalues = np.take_along_axis(diagonal, order, axis=1)
    vectors = np.take_along_axis(np.moveaxis(V, -1, 0), order[:, None, :], axis=2)
    return eigenvalues.reshape(lead + (n,)), vectors.reshape(lead + (n, n))


def top_eigenvalue(matrices: np.ndarray) -> np.ndarray:
    """Largest eigenvalue of each matrix in a stack."""
    return jacobi_eigenvalues(matrices)[..., -1]
