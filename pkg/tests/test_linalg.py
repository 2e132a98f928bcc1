import numpy as np
import pytest
import scipy.sparse as sps

from app.services.errors import RankDeficientError, SingularMatrixError
from app.services.linalg import (
    ProjectorPair,
    dense_solve,
    gmres,
    truncated_left_singular_vectors,
)


def _well_conditioned(n: int = 30, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return 4.0 * np.eye(n) + 0.3 * rng.standard_normal((n, n)) / np.sqrt(n)


def test_gmres_solves_dense_system():
    a = _well_conditioned()
    b = np.arange(1.0, 31.0)
    result = gmres(a, b, rel_tol=1e-10, restart=50, max_iters=200)
    assert result.converged(1e-10)
    assert result.iterations <= 30
    np.testing.assert_allclose(result.solution, np.linalg.solve(a, b), rtol=1e-8)


def test_gmres_with_short_restart_cycles():
    a = _well_conditioned(seed=1)
    b = np.ones(30)
    result = gmres(a, b, rel_tol=1e-9, restart=5, max_iters=500)
    assert result.relative_residual <= 1e-9
    np.testing.assert_allclose(a @ result.solution, b, atol=1e-7)


def test_gmres_accepts_sparse_matrices_and_preconditioners():
    n = 50
    diag = np.linspace(1.0, 1e3, n)
    a = sps.diags([diag, -0.5 * np.ones(n - 1)], [0, 1], format="csr")
    b = np.ones(n)
    jacobi = sps.diags(1.0 / diag)
    plain = gmres(a, b, rel_tol=1e-10, restart=50, max_iters=200)
    preconditioned = gmres(a, b, rel_tol=1e-10, restart=50, max_iters=200, preconditioner=jacobi)
    assert preconditioned.relative_residual <= 1e-10
    assert preconditioned.iterations <= plain.iterations
    np.testing.assert_allclose(a @ preconditioned.solution, b, atol=1e-7)


def test_gmres_zero_rhs():
    result = gmres(np.eye(4), np.zeros(4), rel_tol=1e-8, restart=10, max_iters=10)
    np.testing.assert_array_equal(result.solution, np.zeros(4))
    assert result.relative_residual == 0.0
    assert result.iterations == 0


def test_gmres_reports_true_residual_when_iterations_run_out():
    a = np.diag(np.arange(1.0, 101.0))
    b = np.ones(100)
    result = gmres(a, b, rel_tol=1e-12, restart=2, max_iters=3)
    assert result.iterations == 3
    true_rel = np.linalg.norm(b - a @ result.solution) / np.linalg.norm(b)
    assert result.relative_residual == pytest.approx(true_rel)
    assert not result.converged(1e-12)


def test_gmres_rejects_mismatched_rhs():
    with pytest.raises(ValueError):
        gmres(np.eye(3), np.ones(4), rel_tol=1e-8, restart=3, max_iters=3)


def test_dense_solve():
    a = np.array([[2.0, 1.0], [1.0, 3.0]])
    np.testing.assert_allclose(dense_solve(a, np.array([3.0, 4.0])), [1.0, 1.0])


def test_dense_solve_singular():
    with pytest.raises(SingularMatrixError):
        dense_solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones(2))
    with pytest.raises(SingularMatrixError):
        dense_solve(np.zeros((2, 2)), np.ones(2))


def test_truncated_singular_vectors_span_the_leading_directions():
    rng = np.random.default_rng(3)
    m = rng.standard_normal((40, 6)) @ np.diag([10.0, 5.0, 2.0, 1.0, 0.5, 0.1])
    u = truncated_left_singular_vectors(m, 3)
    reference = np.linalg.svd(m, full_matrices=False)[0][:, :3]

    np.testing.assert_allclose(u.T @ u, np.eye(3), atol=1e-10)
    np.testing.assert_allclose(np.abs(np.diag(u.T @ reference)), np.ones(3), atol=1e-8)


def test_truncated_projection_captures_the_top_gram_energy():
    rng = np.random.default_rng(7)
    m = rng.standard_normal((30, 8)) @ np.diag([9.0, 4.0, 3.0, 1.0, 0.6, 0.3, 0.2, 0.1])
    eigenvalues = np.sort(np.linalg.eigvalsh(m.T @ m))[::-1]
    for d in (1, 3, 5):
        u = truncated_left_singular_vectors(m, d)
        energy = np.linalg.norm(u @ (u.T @ m), "fro") ** 2
        assert energy == pytest.approx(eigenvalues[:d].sum(), rel=1e-8)


def test_truncated_singular_vectors_rank_checks():
    column = np.arange(1.0, 6.0)
    rank_one = np.outer(column, [1.0, 2.0, -1.0])
    assert truncated_left_singular_vectors(rank_one, 1).shape == (5, 1)
    with pytest.raises(RankDeficientError):
        truncated_left_singular_vectors(rank_one, 2)
    with pytest.raises(ValueError):
        truncated_left_singular_vectors(rank_one, 4)


def test_approximate_residual_keeps_in_span_vectors():
    p = np.array([[1.0], [0.0], [0.0]])
    mean = np.array([0.0, 1.0, 0.0])
    proj = ProjectorPair(P=p, Q=p, residual_mean=mean, solution_mean=np.zeros(3))
    fy = np.array([3.0, 1.0, 0.0])
    np.testing.assert_allclose(proj.approximate_residual(fy), fy)
    np.testing.assert_allclose(proj.approximate_residual(np.array([3.0, 1.0, 7.0])), fy)
    assert proj.components == 1
