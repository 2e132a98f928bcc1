"""Jacobian providers: analytic matrices or products, and finite differences."""

from __future__ import annotations

import numpy as np
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from app.services.core import JacobianKind, NonlinearSystem
from app.services.errors import NonFiniteResidualError

SQRT_EPS = float(np.sqrt(np.finfo(float).eps))


def finite_difference_jacobian(
    system: NonlinearSystem, x: np.ndarray, fx: np.ndarray | None = None
) -> np.ndarray:
    """Forward-difference Jacobian, one residual evaluation per column.

    Column j uses the step h_j = sqrt(eps) * max(|x_j|, 1).
    """
    x = np.asarray(x, dtype=float)
    f0 = system.evaluate(x) if fx is None else fx
    n = system.dimension
    jac = np.empty((n, n))
    for j in range(n):
        h = SQRT_EPS * max(abs(x[j]), 1.0)
        probe = x.copy()
        probe[j] += h
        fj = np.asarray(system.residual(probe), dtype=float)
        if not np.all(np.isfinite(fj)):
            raise NonFiniteResidualError(
                f"{system.name}: non-finite residual probing column {j}"
            )
        jac[:, j] = (fj - f0) / h
    return jac


def jacobian_vector_product(
    system: NonlinearSystem, x: np.ndarray, v: np.ndarray, fx: np.ndarray
) -> np.ndarray:
    """F'(x) v, exact for analytic systems, else one directional difference.

    The difference uses u = v / ||v|| and h = sqrt(eps) * (1 + ||x||):
    F'(x) v ~ (F(x + h u) - F(x)) * ||v|| / h.
    """
    v = np.asarray(v, dtype=float)
    v_norm = float(np.linalg.norm(v))
    if v_norm == 0.0:
        return np.zeros(system.dimension)
    if system.kind is JacobianKind.MATRIX:
        return np.asarray(system.jacobian(x) @ v, dtype=float).ravel()
    if system.kind is JacobianKind.MATVEC:
        return np.asarray(system.jvp(x, v), dtype=float)

    h = SQRT_EPS * (1.0 + float(np.linalg.norm(x)))
    probe = np.asarray(system.residual(x + (h / v_norm) * v), dtype=float)
    if not np.all(np.isfinite(probe)):
        raise NonFiniteResidualError(f"{system.name}: non-finite residual in directional probe")
    return (probe - fx) * (v_norm / h)


def jacobian_operator(system: NonlinearSystem, x: np.ndarray, fx: np.ndarray) -> LinearOperator:
    """F'(x) as a linear operator for one Newton step.

    Finite-difference systems assemble the full forward-difference matrix once,
    so the Krylov solve and the directional term share it.
    """
    n = system.dimension
    if system.kind is JacobianKind.MATRIX:
        return aslinearoperator(system.jacobian(x))
    if system.kind is JacobianKind.MATVEC:
        return LinearOperator((n, n), matvec=lambda v: system.jvp(x, np.ravel(v)), dtype=float)
    return aslinearoperator(finite_difference_jacobian(system, x, fx))


def central_difference_jacobian(
    system: NonlinearSystem, x: np.ndarray, step: float = 1e-6
) -> np.ndarray:
    """Second-order reference Jacobian, used to validate the other providers."""
    x = np.asarray(x, dtype=float)
    n = system.dimension
    jac = np.empty((n, n))
    for j in range(n):
        h = step * max(abs(x[j]), 1.0)
        plus, minus = x.copy(), x.copy()
        plus[j] += h
        minus[j] -= h
        jac[:, j] = (system.evaluate(plus) - system.evaluate(minus)) / (2.0 * h)
    return jac
