import numpy as np
import pytest
import scipy.sparse as sps

from app.services.core import JacobianKind, NonlinearSystem


def affine(c: np.ndarray) -> NonlinearSystem:
    """F(x) = x - c with the identity Jacobian."""
    n = c.size
    return NonlinearSystem(
        name="affine",
        dimension=n,
        residual=lambda x: x - c,
        kind=JacobianKind.MATRIX,
        jacobian=lambda x: sps.identity(n, format="csr"),
    )


def cubic_diagonal(n: int = 6) -> NonlinearSystem:
    """F_i(x) = x_i + 0.1 x_i^3 - (20 + i); decoupled and monotone."""
    c = 20.0 + np.arange(n)
    return NonlinearSystem(
        name="cubic",
        dimension=n,
        residual=lambda x: x + 0.1 * x**3 - c,
        kind=JacobianKind.MATRIX,
        jacobian=lambda x: sps.diags(1.0 + 0.3 * x**2, format="csr"),
    )


@pytest.fixture
def affine_system():
    return affine(np.array([1.0, -2.0, 3.0, 0.5]))


@pytest.fixture
def cubic_system():
    return cubic_diagonal(6)
