import numpy as np
import pytest
from pydantic import ValidationError

from app.models.schemas import IterationRecord, SolveReport, SolverOptions
from app.services.core import (
    JacobianKind,
    NonlinearSystem,
    count_stagnant,
    initial_weight_vector,
    is_stagnant,
    resolve_beta,
    stopping_satisfied,
)
from app.services.errors import NonFiniteResidualError


def test_system_rejects_missing_jacobian():
    with pytest.raises(ValueError):
        NonlinearSystem("bad", 3, lambda x: x, kind=JacobianKind.MATRIX)
    with pytest.raises(ValueError):
        NonlinearSystem("bad", 3, lambda x: x, kind=JacobianKind.MATVEC)
    with pytest.raises(ValueError):
        NonlinearSystem("bad", 0, lambda x: x)


def test_evaluate_checks_shape_and_finiteness():
    system = NonlinearSystem("log", 2, lambda x: np.log(x))
    with pytest.raises(NonFiniteResidualError):
        system.evaluate(np.array([1.0, -1.0]))

    short = NonlinearSystem("short", 3, lambda x: x[:2])
    with pytest.raises(ValueError):
        short.evaluate(np.zeros(3))


def test_stopping_rule_takes_the_looser_tolerance():
    opts = SolverOptions(abs_tol=1e-8, rel_tol=1e-6)
    assert stopping_satisfied(5e-9, 1.0, opts)
    assert stopping_satisfied(5e-5, 100.0, opts)  # 1e-6 * 100 = 1e-4
    assert not stopping_satisfied(2e-4, 100.0, opts)


def test_stagnation():
    assert is_stagnant(1.0, 1.0 + 1e-7, 1e-6)
    assert not is_stagnant(1.0, 0.5, 1e-6)
    assert not is_stagnant(0.0, 0.0, 1e-6)


def test_count_stagnant():
    records = [
        IterationRecord(k=i + 1, residual_norm=1.0, step_length=1.0, line_search_count=0,
                        forcing_term=0.1, stagnant=flag)
        for i, flag in enumerate([True, False, True])
    ]
    assert count_stagnant(records) == 2


def test_beta_defaults_to_a_fraction_of_the_initial_norm():
    assert resolve_beta(SolverOptions(), 50.0) == pytest.approx(5.0)
    assert resolve_beta(SolverOptions(beta=2.0), 50.0) == 2.0


def test_initial_weights():
    np.testing.assert_array_equal(initial_weight_vector(SolverOptions(), 3), np.ones(3))
    opts = SolverOptions(initial_weights=[1.0, 2.0])
    with pytest.raises(ValueError):
        initial_weight_vector(opts, 3)


def test_options_are_frozen_and_validated():
    opts = SolverOptions()
    with pytest.raises(ValidationError):
        opts.g_max = 3
    with pytest.raises(ValidationError):
        SolverOptions(pinl_training_size=4, pinl_components=5)
    with pytest.raises(ValidationError):
        SolverOptions(backtrack_rho=1.0)
    with pytest.raises(ValidationError):
        SolverOptions(initial_weights=[1.0, -0.1])
    with pytest.raises(ValidationError):
        SolverOptions(unknown_field=1)


def test_report_counts_must_match_history():
    record = IterationRecord(k=1, residual_norm=0.1, step_length=1.0, line_search_count=0,
                             forcing_term=0.1, stagnant=True)
    common = dict(solver="inb", status="converged", converged=True, wall_time=0.0,
                  initial_residual_norm=1.0, final_residual_norm=0.1, final_point=[0.0])
    SolveReport(n_ite=1, n_sta=1, history=[record], **common)
    with pytest.raises(ValidationError):
        SolveReport(n_ite=2, n_sta=1, history=[record], **common)
    with pytest.raises(ValidationError):
        SolveReport(n_ite=1, n_sta=0, history=[record], **common)
