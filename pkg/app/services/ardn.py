"""Adaptive residual-driven weighting layered on the INB loop."""

from __future__ import annotations

import logging
import math

import numpy as np

from app.models.schemas import SolveReport, SolverOptions, WeightStrategy
from app.services.core import NonlinearSystem, initial_weight_vector
from app.services.errors import InvariantViolation
from app.services.inb import InexactNewtonSolver

logger = logging.getLogger(__name__)


def _gaussian(t: float, sigma: float) -> float:
    return math.exp(-((t - 1.0) ** 2) / (2.0 * sigma**2))


def decay_factors(ratio: float, options: SolverOptions) -> tuple[float, float]:
    """(delta1, delta2) for the residual ratio ||F^k|| / ||F^{k-1}||.

    delta1 is the weight decay factor, delta2 the recognition factor; both
    approach (delta, 0) as the ratio approaches 1.
    """
    delta1 = options.base_decay * _gaussian(ratio, options.sigma1)
    delta2 = 1.0 - _gaussian(ratio, options.sigma2)
    return delta1, delta2


def learning_rate(g_prev: float, options: SolverOptions) -> float:
    return options.initial_learning_rate * (2.0 * g_prev / options.g_max)


def update_weights(
    weights: np.ndarray,
    residual: np.ndarray,
    delta1: float,
    delta2: float,
    alpha_k: float,
    strategy: WeightStrategy,
    options: SolverOptions,
) -> np.ndarray:
    abs_e = np.abs(residual)
    e_max = float(abs_e.max()) if abs_e.size else 0.0
    if e_max == 0.0:
        return weights.copy()
    share = abs_e / e_max

    if strategy == "full":
        return delta1 * weights + alpha_k * (share + delta2 * (e_max - abs_e) / e_max)
    if strategy == "simplified1":
        return options.base_decay * weights + options.initial_learning_rate * share
    if strategy == "simplified2":
        return options.base_decay * weights + alpha_k * share
    raise ValueError(f"unknown weight strategy {strategy!r}")


def weighted_merit(weights: np.ndarray, fx: np.ndarray) -> float:
    """1/2 ||w * F||^2."""
    wf = weights * fx
    return 0.5 * float(wf @ wf)


def weighted_directional_term(weights: np.ndarray, fx: np.ndarray, js: np.ndarray) -> float:
    """(w * w * F)^T F'S; the line search applies the alpha * lambda factor."""
    return float((weights * weights * fx) @ js)


def weight_upper_bound(first_weights: np.ndarray, options: SolverOptions) -> np.ndarray:
    return first_weights + 2.0 * options.initial_learning_rate / (1.0 - options.base_decay)


class AdaptiveResidualNewtonSolver(InexactNewtonSolver):
    """Algorithm ARDN: INB whose merit is reweighted before every linear solve.

    Iteration 0 uses the initial weights unchanged; from then on the weights
    follow ``options.weight_strategy``. The learning rate at iteration 1 uses
    g_prev = g_max / 2 so that it equals the initial learning rate.
    """

    name = "ardn"

    def _reset(self, x0: np.ndarray, f0: np.ndarray) -> None:
        self._weights = initial_weight_vector(self.options, self.system.dimension)
        self._bound = weight_upper_bound(self._weights, self.options)

    def _prepare_weights(
        self, k: int, fx: np.ndarray, norm_k: float, norm_prev: float | None, g_prev: int | None
    ) -> np.ndarray:
        opts = self.options
        if k == 0 or opts.freeze_weights or norm_prev is None or norm_prev == 0.0:
            return self._weights

        ratio = norm_k / norm_prev
        delta1, delta2 = decay_factors(ratio, opts)
        alpha_k = learning_rate(opts.g_max / 2.0 if k == 1 else g_prev, opts)
        self._weights = update_weights(
            self._weights, fx, delta1, delta2, alpha_k, opts.weight_strategy, opts
        )

        if opts.verify:
            tol = 1e-12 * np.maximum(1.0, self._bound)
            if np.any(self._weights < -tol) or np.any(self._weights > self._bound + tol):
                raise InvariantViolation(
                    f"iteration {k + 1}: weights left [0, w1 + 2 alpha*/(1 - delta)]"
                )
        logger.debug(
            "ardn k=%d ratio=%.6f delta1=%.3e delta2=%.3e alpha=%.3e w in [%.3e, %.3e]",
            k, ratio, delta1, delta2, alpha_k, self._weights.min(), self._weights.max(),
        )
        return self._weights

    @staticmethod
    def merit(weights: np.ndarray | None, fx: np.ndarray) -> float:
        return weighted_merit(weights, fx)

    @staticmethod
    def directional_term(weights: np.ndarray | None, fx: np.ndarray, js: np.ndarray) -> float:
        return weighted_directional_term(weights, fx, js)


def ardn_solve(
    system: NonlinearSystem,
    x0: np.ndarray,
    options: SolverOptions | None = None,
    preconditioner=None,
) -> SolveReport:
    return AdaptiveResidualNewtonSolver(system, options, preconditioner).solve(x0)
