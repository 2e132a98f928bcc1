"""Krylov and dense linear algebra used by the Newton solvers."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from app.services.errors import RankDeficientError, SingularMatrixError

logger = logging.getLogger(__name__)

# Arnoldi stops when the new basis vector's norm falls below this fraction of
# the vector it was orthogonalized from.
BREAKDOWN_TOL = 1e-14
REORTHOGONALIZE_TOL = 1e-8
SINGULAR_PIVOT_TOL = 1e-14
RANK_TOL = 1e-12


class KrylovResult(NamedTuple):
    solution: np.ndarray
    relative_residual: float
    iterations: int

    def converged(self, rel_tol: float) -> bool:
        return self.relative_residual <= rel_tol


@dataclass(frozen=True)
class ProjectorPair:
    """PCA operators: P spans the residual data, Q the solution data."""

    P: np.ndarray
    Q: np.ndarray
    residual_mean: np.ndarray
    solution_mean: np.ndarray

    @property
    def components(self) -> int:
        return self.P.shape[1]

    def approximate_residual(self, fy: np.ndarray) -> np.ndarray:
        """PP^T (F(Y) - F_bar) + F_bar."""
        centered = fy - self.residual_mean
        return self.P @ (self.P.T @ centered) + self.residual_mean


def as_operator(a) -> LinearOperator:
    return a if isinstance(a, LinearOperator) else aslinearoperator(a)


def _givens(a: float, b: float) -> tuple[float, float]:
    r = np.hypot(a, b)
    if r == 0.0:
        return 1.0, 0.0
    return a / r, b / r


def gmres(
    op,
    rhs: np.ndarray,
    rel_tol: float,
    restart: int,
    max_iters: int,
    preconditioner=None,
) -> KrylovResult:
    """Restarted GMRES from a zero initial guess.

    Modified Gram-Schmidt Arnoldi with a second pass when the new vector is
    not orthogonal to the basis to within REORTHOGONALIZE_TOL. With a
    preconditioner M the iteration runs on A M (right preconditioning).
    Returns the final iterate with its true relative residual even when
    ``max_iters`` is exhausted.
    """
    a = as_operator(op)
    m_op = as_operator(preconditioner) if preconditioner is not None else None
    b = np.asarray(rhs, dtype=float)
    n = a.shape[0]
    if b.shape != (n,):
        raise ValueError(f"rhs has shape {b.shape}, operator dimension is {n}")

    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return KrylovResult(np.zeros(n), 0.0, 0)

    target = rel_tol * b_norm
    x = np.zeros(n)
    r = b.copy()
    total = 0
    stop = False

    while total < max_iters and not stop:
        beta = float(np.linalg.norm(r))
        if beta <= target:
            break
        m = min(restart, max_iters - total)
        basis = np.zeros((m + 1, n))
        hess = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = beta
        basis[0] = r / beta
        cols = 0

        for j in range(m):
            z = m_op.matvec(basis[j]) if m_op is not None else basis[j]
            w = np.asarray(a.matvec(z), dtype=float).ravel()
            w_norm0 = float(np.linalg.norm(w))

            for i in range(j + 1):
                hess[i, j] = basis[i] @ w
                w -= hess[i, j] * basis[i]
            h_next = float(np.linalg.norm(w))

            if h_next > 0.0:
                loss = float(np.max(np.abs(basis[: j + 1] @ w))) / h_next
                if loss > REORTHOGONALIZE_TOL:
                    for i in range(j + 1):
                        c = basis[i] @ w
                        hess[i, j] += c
                        w -= c * basis[i]
                    h_next = float(np.linalg.norm(w))
            hess[j + 1, j] = h_next

            for i in range(j):
                upper = cs[i] * hess[i, j] + sn[i] * hess[i + 1, j]
                hess[i + 1, j] = -sn[i] * hess[i, j] + cs[i] * hess[i + 1, j]
                hess[i, j] = upper
            cs[j], sn[j] = _givens(hess[j, j], hess[j + 1, j])
            hess[j, j] = cs[j] * hess[j, j] + sn[j] * hess[j + 1, j]
            hess[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]

            total += 1
            cols = j + 1
            breakdown = h_next <= BREAKDOWN_TOL * max(w_norm0, 1e-300)
            if abs(g[j + 1]) <= target or breakdown:
                stop = True
                break
            basis[j + 1] = w / h_next

        y = _triangular_coefficients(hess[:cols, :cols], g[:cols])
        update = basis[:cols].T @ y
        x += m_op.matvec(update) if m_op is not None else update
        r = b - np.asarray(a.matvec(x), dtype=float).ravel()
        logger.debug("gmres cycle: %d iterations, estimate %.3e", total, abs(g[cols]) / b_norm)

    rel = float(np.linalg.norm(r)) / b_norm
    return KrylovResult(x, rel, total)


def _triangular_coefficients(upper: np.ndarray, g: np.ndarray) -> np.ndarray:
    diag = np.abs(np.diag(upper))
    if diag.size and diag.min() > 0.0:
        return sla.solve_triangular(upper, g)
    # singular operator: least-squares coefficients on the reduced system
    return np.linalg.lstsq(upper, g, rcond=None)[0]


def dense_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a small square system by LU with partial pivoting."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if scale == 0.0:
        raise SingularMatrixError("matrix is identically zero")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a)
    pivot = float(np.min(np.abs(np.diag(lu))))
    if pivot < SINGULAR_PIVOT_TOL * scale:
        raise SingularMatrixError(
            f"pivot {pivot:.3e} below {SINGULAR_PIVOT_TOL:g} * max|a| = {scale:.3e}"
        )
    return sla.lu_solve((lu, piv), b)


def truncated_left_singular_vectors(m: np.ndarray, d: int) -> np.ndarray:
    """First d left singular vectors of an n x s matrix, largest first.

    Works on the s x s Gram matrix m^T m: with eigenpairs (sigma^2, v),
    u = m v / sigma.
    """
    m = np.asarray(m, dtype=float)
    if d < 1:
        raise ValueError("d must be a positive integer")
    if d > m.shape[1]:
        raise ValueError(f"d={d} exceeds the number of columns s={m.shape[1]}")

    evals, evecs = sla.eigh(m.T @ m)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    singular = np.sqrt(np.clip(evals, 0.0, None))

    # Gram eigenvalues carry rounding noise of order eps * max; compare them, not
    # their square roots
    top = evals[0] if evals.size else 0.0
    rank = int(np.count_nonzero(evals > RANK_TOL * top)) if top > 0.0 else 0
    if rank < d:
        raise RankDeficientError(
            f"data matrix has numerical rank {rank} < d={d}; reduce the number of components"
        )

    u = (m @ evecs[:, :d]) / singular[:d]
    # clean up orthogonality without changing the span or column signs
    q, r = np.linalg.qr(u)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs
