import numpy as np
import pytest
import scipy.sparse as sps

from app.models.schemas import SolverOptions
from app.services.core import JacobianKind, NonlinearSystem
from app.services.errors import InvariantViolation
from app.services.inb import (
    ForcingState,
    InexactNewtonSolver,
    armijo_backtracking,
    forcing_term,
    inb_solve,
)
from app.services.problems import augmented_rosenbrock, modified_rosenbrock


def test_forcing_term_uses_eta0_far_from_the_root():
    opts = SolverOptions(eta0=0.25)
    assert forcing_term(None, 1.0, opts, beta=10.0) == 0.25
    assert forcing_term(ForcingState(2.0, 1.0), 11.0, opts, beta=10.0) == 0.25


def test_forcing_term_tracks_the_linear_model_and_is_clamped():
    opts = SolverOptions(forcing_min=1e-4, forcing_max=0.9)
    # |0.5 - 0.3| / 1.0
    assert forcing_term(ForcingState(1.0, 0.3), 0.5, opts, beta=10.0) == pytest.approx(0.2)
    assert forcing_term(ForcingState(1.0, 0.5), 0.5, opts, beta=10.0) == 1e-4
    assert forcing_term(ForcingState(0.1, 0.0), 0.5, opts, beta=10.0) == 0.9


def _half_square(z):
    return 0.5 * float(z @ z)


def test_armijo_backtracks_past_an_overshoot():
    x = np.array([1.0])
    result = armijo_backtracking(_half_square, x, np.array([-2.0]), -2.0, SolverOptions())
    assert result.satisfied
    assert result.step_length == 0.5
    assert result.rejections == 1
    np.testing.assert_allclose(result.point, [0.0])
    assert result.merit_value <= result.merit_initial


def test_armijo_exhaustion_returns_the_smallest_step():
    opts = SolverOptions(g_max=3)
    result = armijo_backtracking(_half_square, np.array([1.0]), np.array([1.0]), -1.0, opts)
    assert not result.satisfied
    assert result.rejections == 3
    assert result.step_length == pytest.approx(0.5**3)


def test_armijo_treats_non_finite_trials_as_rejections():
    def merit(z):
        return float("inf") if abs(z[0]) > 1.5 else _half_square(z)

    result = armijo_backtracking(merit, np.array([1.0]), np.array([-4.0]), -4.0, SolverOptions())
    assert result.satisfied
    assert result.rejections == 2
    assert result.step_length == 0.25


def test_affine_system_converges_in_one_full_step(affine_system):
    report = inb_solve(affine_system, np.zeros(4))
    assert report.converged
    assert report.status == "converged"
    assert report.n_ite == 1
    assert report.history[0].step_length == 1.0
    assert report.history[0].line_search_count == 0
    np.testing.assert_allclose(report.final_point, [1.0, -2.0, 3.0, 0.5])


def test_starting_at_the_root_takes_no_steps(affine_system):
    report = inb_solve(affine_system, np.array([1.0, -2.0, 3.0, 0.5]))
    assert report.converged
    assert report.n_ite == 0
    assert report.history == []


def test_history_is_consistent(cubic_system):
    report = inb_solve(cubic_system, np.zeros(6))
    assert report.converged
    assert report.n_ite == len(report.history)
    assert report.n_sta == sum(r.stagnant for r in report.history)
    assert [r.k for r in report.history] == list(range(1, report.n_ite + 1))
    assert report.final_residual_norm == report.history[-1].residual_norm
    for record in report.history:
        assert 0 <= record.line_search_count <= SolverOptions().g_max
        assert record.step_length == pytest.approx(0.5**record.line_search_count)
        if record.armijo_satisfied:
            decrease = 1e-4 * record.step_length * record.directional_term
            assert record.merit_after <= record.merit_before + decrease


def test_verify_mode_checks_the_inexact_newton_condition(cubic_system):
    report = inb_solve(cubic_system, np.zeros(6), SolverOptions(verify=True))
    assert report.converged
    solved = [r for r in report.history if r.linear_relative_residual <= r.forcing_term]
    assert solved


def test_solves_are_deterministic():
    bench = modified_rosenbrock(10)
    first = inb_solve(bench.system, bench.initial_guess, bench.recommended_options())
    second = inb_solve(bench.system, bench.initial_guess, bench.recommended_options())
    assert [r.residual_norm for r in first.history] == [r.residual_norm for r in second.history]
    assert first.final_point == second.final_point


def test_rosenbrock_variants_converge():
    for bench in (modified_rosenbrock(10), augmented_rosenbrock(8)):
        report = inb_solve(bench.system, bench.initial_guess, bench.recommended_options())
        assert report.converged, bench.id


def test_iteration_cap_reports_max_iterations(cubic_system):
    opts = SolverOptions(max_newton_iters=2, pinl_training_size=2, pinl_components=1)
    report = inb_solve(cubic_system, np.zeros(6), opts)
    assert not report.converged
    assert report.status == "max_iterations"
    assert report.n_ite == 2


def test_non_finite_trials_abort_with_a_partial_history():
    c = np.array([1.0])
    system = NonlinearSystem(
        name="cliff",
        dimension=1,
        residual=lambda x: np.where(x > 0.9, np.nan, x - c),
        kind=JacobianKind.MATRIX,
        jacobian=lambda x: sps.identity(1, format="csr"),
    )
    report = InexactNewtonSolver(system, SolverOptions(g_max=2)).solve(np.zeros(1))
    assert report.status == "aborted"
    assert not report.converged
    assert report.n_ite == 3
    assert "non-finite" in report.message
    np.testing.assert_allclose(report.final_point, [0.875])


class _RejectsThirdStep(InexactNewtonSolver):
    def _prepare_weights(self, k, fx, norm_k, norm_prev, g_prev):
        if k == 2:
            raise InvariantViolation("weights out of range")
        return None


def test_invariant_violation_carries_the_partial_history(cubic_system):
    with pytest.raises(InvariantViolation) as exc:
        _RejectsThirdStep(cubic_system).solve(np.zeros(6))
    report = exc.value.report
    assert report.status == "aborted"
    assert not report.converged
    assert report.n_ite == 2
    assert "weights out of range" in report.message
    assert report.final_residual_norm == report.history[-1].residual_norm


def test_bad_initial_guess_shape(affine_system):
    with pytest.raises(ValueError):
        inb_solve(affine_system, np.zeros(3))
