"""Benchmark systems: chemical equilibrium, convection-diffusion, P1-P5."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.sparse as sps
from scipy.special import expit

from app.models.schemas import SolverOptions
from app.services.core import JacobianKind, NonlinearSystem


@dataclass(frozen=True)
class BenchmarkProblem:
    id: str
    name: str
    system: NonlinearSystem
    initial_guess: np.ndarray
    recommended: dict[str, Any] = field(default_factory=dict)
    parameters: dict[str, Any] = field(default_factory=dict)
    known_solution: np.ndarray | None = None

    def recommended_options(self, **overrides: Any) -> SolverOptions:
        return SolverOptions(**{**self.recommended, **overrides})


# ── Chemical equilibrium ──────────────────────────────────────────────────────

R = 10.0
R5 = 0.193
R6 = 0.002597 / np.sqrt(40.0)
R7 = 0.003448 / np.sqrt(40.0)
R8 = 0.00001799 / 40.0
R9 = 0.0002155 / np.sqrt(40.0)
R10 = 0.00003846 / 40.0


def _chemical_residual(x: np.ndarray) -> np.ndarray:
    x1, x2, x3, x4, x5 = x
    return np.array([
        x1 * x2 + x1 - 3.0 * x5,
        2.0 * x1 * x2 + x1 + x2 * x3**2 + R8 * x2 - R * x5
        + 2.0 * R10 * x2**2 + R7 * x2 * x3 + R9 * x2 * x4,
        2.0 * x2 * x3**2 - 8.0 * x5 + R6 * x3 + R7 * x2 * x3,
        R9 * x2 * x4 + 2.0 * x4**2 - 4.0 * R * x5,
        x1 * (x2 + 1.0) + R10 * x2**2 + R8 * x2 + R5 * x3**2 - 1.0
        + R6 * x3 + R7 * x2 * x3 + R9 * x2 * x4,
    ])


def chemical_equilibrium() -> BenchmarkProblem:
    """Five-species combustion equilibrium; Jacobian by finite differences."""
    system = NonlinearSystem(
        name="chemical",
        dimension=5,
        residual=_chemical_residual,
        kind=JacobianKind.FINITE_DIFFERENCE,
    )
    return BenchmarkProblem(
        id="chemical",
        name="Chemical equilibrium",
        system=system,
        initial_guess=np.zeros(5),
        recommended={"g_max": 36, "pinl_training_size": 8, "pinl_components": 2},
    )


# ── Convection-diffusion ──────────────────────────────────────────────────────


def _phi_derivatives(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """phi(x) = 10 x (1 - x) exp(x^4.5) and its first two derivatives."""
    p, dp, ddp = x * (1.0 - x), 1.0 - 2.0 * x, -2.0
    e = np.exp(x**4.5)
    dq = 4.5 * x**3.5
    ddq = 15.75 * x**2.5
    phi = 10.0 * p * e
    dphi = 10.0 * e * (dp + p * dq)
    ddphi = 10.0 * e * (ddp + 2.0 * dp * dq + p * ddq + p * dq**2)
    return phi, dphi, ddphi


def convection_diffusion_exact(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """u(x, y) = 10 x y (1 - x)(1 - y) exp(x^4.5)."""
    phi, _, _ = _phi_derivatives(x)
    return phi * y * (1.0 - y)


def convection_diffusion_source(x: np.ndarray, y: np.ndarray, c: float) -> np.ndarray:
    """g = Laplace(u) + C u (u_x + u_y) for the exact solution u = phi(x) psi(y)."""
    phi, dphi, ddphi = _phi_derivatives(x)
    psi, dpsi, ddpsi = y * (1.0 - y), 1.0 - 2.0 * y, -2.0
    return ddphi * psi + phi * ddpsi + c * phi * psi * (dphi * psi + phi * dpsi)


def convection_diffusion(c: float = 100.0, grid_n: int = 50) -> BenchmarkProblem:
    """Central differences for Lap(u) + C u (u_x + u_y) = g on the unit square.

    Unknowns are the grid_n x grid_n interior nodes, ordered with the x index
    outermost; the boundary is homogeneous Dirichlet.
    """
    if grid_n < 3:
        raise ValueError("grid_n must be at least 3")
    m = int(grid_n)
    n = m * m
    h = 1.0 / (m + 1)
    nodes = h * np.arange(1, m + 1)
    X, Y = np.meshgrid(nodes, nodes, indexing="ij")
    g = convection_diffusion_source(X, Y, c)
    inv_h2 = 1.0 / h**2
    half_c_h = c / (2.0 * h)

    def padded(u: np.ndarray) -> np.ndarray:
        U = np.zeros((m + 2, m + 2))
        U[1:-1, 1:-1] = u.reshape(m, m)
        return U

    def residual(u: np.ndarray) -> np.ndarray:
        U = padded(u)
        center = U[1:-1, 1:-1]
        east, west = U[2:, 1:-1], U[:-2, 1:-1]
        north, south = U[1:-1, 2:], U[1:-1, :-2]
        lap = (east + west + north + south - 4.0 * center) * inv_h2
        conv = half_c_h * center * ((east - west) + (north - south))
        return (lap + conv - g).ravel()

    def jacobian(u: np.ndarray) -> sps.csr_matrix:
        U = padded(u)
        center = U[1:-1, 1:-1]
        grad = (U[2:, 1:-1] - U[:-2, 1:-1]) + (U[1:-1, 2:] - U[1:-1, :-2])
        main = (-4.0 * inv_h2 + half_c_h * grad).ravel()
        cu = half_c_h * u
        rows = np.arange(n)
        # x neighbours sit m entries away, y neighbours one entry away
        x_plus = inv_h2 + cu[: n - m]
        x_minus = inv_h2 - cu[m:]
        y_plus = np.where(rows[: n - 1] % m != m - 1, inv_h2 + cu[: n - 1], 0.0)
        y_minus = np.where(rows[1:] % m != 0, inv_h2 - cu[1:], 0.0)
        return sps.diags(
            [main, x_plus, x_minus, y_plus, y_minus], [0, m, -m, 1, -1], format="csr"
        )

    system = NonlinearSystem(
        name=f"convdiff(C={c:g}, {m}x{m})",
        dimension=n,
        residual=residual,
        kind=JacobianKind.MATRIX,
        jacobian=jacobian,
    )
    return BenchmarkProblem(
        id="convdiff",
        name="Convection-diffusion",
        system=system,
        initial_guess=np.zeros(n),
        recommended={
            "rel_tol": 1e-10,
            "stagnation_tau": 1e-2,
            "g_max": 24,
            "gmres_restart": 50,
            "pinl_training_size": 6,
            "pinl_components": 3,
        },
        parameters={"c": c, "grid": m},
    )


# ── P1: modified Rosenbrock ───────────────────────────────────────────────────


def modified_rosenbrock(n: int = 60) -> BenchmarkProblem:
    if n < 2 or n % 2:
        raise ValueError("modified Rosenbrock needs an even n >= 2")

    def residual(x: np.ndarray) -> np.ndarray:
        f = np.empty(n)
        f[0::2] = expit(x[0::2]) - 0.73
        f[1::2] = 10.0 * (x[1::2] - x[0::2] ** 2)
        return f

    def jacobian(x: np.ndarray) -> sps.csr_matrix:
        main = np.full(n, 10.0)
        s = expit(x[0::2])
        main[0::2] = s * (1.0 - s)
        lower = np.zeros(n - 1)
        lower[0::2] = -20.0 * x[0:n - 1:2]
        return sps.diags([main, lower], [0, -1], format="csr")

    x0 = np.where(np.arange(n) % 2 == 0, -1.8, -1.0)
    root = np.log(0.73 / 0.27)
    solution = np.where(np.arange(n) % 2 == 0, root, root**2)
    return BenchmarkProblem(
        id="p1",
        name="Modified Rosenbrock",
        system=NonlinearSystem(f"p1(n={n})", n, residual, JacobianKind.MATRIX, jacobian),
        initial_guess=x0,
        recommended={"g_max": 12, "stagnation_tau": 1e-2},
        parameters={"size": n},
        known_solution=solution,
    )


# ── P2: augmented Rosenbrock ──────────────────────────────────────────────────


def augmented_rosenbrock(n: int = 6000) -> BenchmarkProblem:
    if n < 4 or n % 4:
        raise ValueError("augmented Rosenbrock needs n divisible by 4")
    phase = np.arange(n) % 4

    def residual(x: np.ndarray) -> np.ndarray:
        f = np.empty(n)
        f[0::4] = 10.0 * (x[1::4] - x[0::4] ** 2)
        f[1::4] = 1.0 - x[0::4]
        f[2::4] = 1.25 * x[2::4] - 0.25 * x[2::4] ** 3
        f[3::4] = x[3::4]
        return f

    def jacobian(x: np.ndarray) -> sps.csr_matrix:
        main = np.zeros(n)
        main[0::4] = -20.0 * x[0::4]
        main[2::4] = 1.25 - 0.75 * x[2::4] ** 2
        main[3::4] = 1.0
        upper = np.where(phase[: n - 1] == 0, 10.0, 0.0)
        lower = np.where(phase[1:] == 1, -1.0, 0.0)
        return sps.diags([main, upper, lower], [0, 1, -1], format="csr")

    x0 = np.array([-1.2, 1.0, -1.0, 20.0])[phase]
    return BenchmarkProblem(
        id="p2",
        name="Augmented Rosenbrock",
        system=NonlinearSystem(f"p2(n={n})", n, residual, JacobianKind.MATRIX, jacobian),
        initial_guess=x0,
        recommended={"g_max": 12},
        parameters={"size": n},
    )


# ── P3: tridiagonal ───────────────────────────────────────────────────────────


def tridiagonal(n: int = 60) -> BenchmarkProblem:
    if n < 3:
        raise ValueError("tridiagonal problem needs n >= 3")

    def residual(x: np.ndarray) -> np.ndarray:
        f = np.zeros(n)
        f[1:] += 8.0 * x[1:] * (x[1:] ** 2 - x[:-1]) - 2.0 * (1.0 - x[1:])
        f[:-1] += 4.0 * (x[:-1] - x[1:] ** 2)
        return f

    def jacobian(x: np.ndarray) -> sps.csr_matrix:
        main = np.zeros(n)
        main[1:] += 24.0 * x[1:] ** 2 - 8.0 * x[:-1] + 2.0
        main[:-1] += 4.0
        lower = -8.0 * x[1:]
        upper = -8.0 * x[1:]
        return sps.diags([main, lower, upper], [0, -1, 1], format="csr")

    return BenchmarkProblem(
        id="p3",
        name="Tridiagonal",
        system=NonlinearSystem(f"p3(n={n})", n, residual, JacobianKind.MATRIX, jacobian),
        initial_guess=np.full(n, 12.0),
        recommended={"g_max": 12},
        parameters={"size": n},
        known_solution=np.ones(n),
    )


# ── P4: five-diagonal ─────────────────────────────────────────────────────────


def five_diagonal(n: int = 100) -> BenchmarkProblem:
    if n < 5:
        raise ValueError("five-diagonal problem needs n >= 5")

    def residual(x: np.ndarray) -> np.ndarray:
        f = np.zeros(n)
        f[1:] += 8.0 * x[1:] * (x[1:] ** 2 - x[:-1]) - 2.0 * (1.0 - x[1:])
        f[:-1] += 4.0 * (x[:-1] - x[1:] ** 2)
        f[2:] += x[1:-1] ** 2 - x[:-2]
        f[:-2] += x[1:-1] - x[2:] ** 2
        return f

    def jacobian(x: np.ndarray) -> sps.csr_matrix:
        main = np.zeros(n)
        main[1:] += 24.0 * x[1:] ** 2 - 8.0 * x[:-1] + 2.0
        main[:-1] += 4.0
        lower1 = -8.0 * x[1:]
        lower1[1:] += 2.0 * x[1:-1]
        lower2 = np.full(n - 2, -1.0)
        upper1 = -8.0 * x[1:]
        upper1[:-1] += 1.0
        upper2 = -2.0 * x[2:]
        return sps.diags(
            [main, lower1, lower2, upper1, upper2], [0, -1, -2, 1, 2], format="csr"
        )

    return BenchmarkProblem(
        id="p4",
        name="Five-diagonal",
        system=NonlinearSystem(f"p4(n={n})", n, residual, JacobianKind.MATRIX, jacobian),
        initial_guess=np.full(n, 12.0),
        recommended={"g_max": 12},
        parameters={"size": n},
        known_solution=np.ones(n),
    )


# ── P5: tridimensional valley ─────────────────────────────────────────────────

C1 = 1.003344481605351
C2 = -3.344481605351171e-3


def tridimensional_valley(n: int = 1200) -> BenchmarkProblem:
    if n < 3 or n % 3:
        raise ValueError("tridimensional valley needs n divisible by 3")
    phase = np.arange(n) % 3

    def residual(x: np.ndarray) -> np.ndarray:
        f = np.empty(n)
        a = x[0::3]
        f[0::3] = (C2 * a**3 + C1 * a) * np.exp(-(a**2) / 100.0) - 1.0
        f[1::3] = 10.0 * (np.sin(x[0::3]) - x[1::3])
        f[2::3] = 10.0 * (np.cos(x[0::3]) - x[2::3])
        return f

    def jacobian(x: np.ndarray) -> sps.csr_matrix:
        a = x[0::3]
        main = np.full(n, -10.0)
        main[0::3] = ((3.0 * C2 * a**2 + C1) - (C2 * a**3 + C1 * a) * a / 50.0) * np.exp(
            -(a**2) / 100.0
        )
        lower1 = np.where(phase[1:] == 1, 10.0 * np.cos(x[:-1]), 0.0)
        lower2 = np.where(phase[2:] == 2, -10.0 * np.sin(x[:-2]), 0.0)
        return sps.diags([main, lower1, lower2], [0, -1, -2], format="csr")

    x0 = np.array([-4.0, 1.0, 2.0])[phase]
    return BenchmarkProblem(
        id="p5",
        name="Tridimensional valley",
        system=NonlinearSystem(f"p5(n={n})", n, residual, JacobianKind.MATRIX, jacobian),
        initial_guess=x0,
        recommended={"g_max": 12, "stagnation_tau": 1e-2},
        parameters={"size": n},
    )
