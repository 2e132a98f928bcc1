from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

WeightStrategy = Literal["full", "simplified1", "simplified2"]
SolverName = Literal["inb", "ardn", "pinl"]
InnerSolverName = Literal["inb", "ardn"]
SolveStatus = Literal["converged", "max_iterations", "aborted"]


class SolverOptions(BaseModel):
    """Every tunable of the INB, ARDN and PIN^L loops."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    # stopping rule
    abs_tol: float = Field(1e-8, gt=0)
    rel_tol: float = Field(1e-12, gt=0)
    max_newton_iters: int = Field(200, ge=1)

    # forcing term
    eta0: float = Field(0.25, gt=0, lt=1)
    beta: float | None = Field(None, gt=0, description="Absolute switch threshold; None derives it")
    beta_factor: float = Field(
        0.1, gt=0, description="beta = beta_factor * ||F(X0)|| when beta unset"
    )
    forcing_min: float = Field(1e-8, gt=0, lt=1)
    forcing_max: float = Field(0.9, gt=0, lt=1)

    # line search
    armijo_alpha: float = Field(1e-4, gt=0, lt=1)
    backtrack_rho: float = Field(0.5, gt=0, lt=1)
    g_max: int = Field(12, ge=1)

    # adaptive weights
    initial_weights: list[float] | None = None
    base_decay: float = Field(0.5, gt=0, lt=1)
    initial_learning_rate: float = Field(0.24, ge=0)
    sigma1: float = Field(0.3, gt=0)
    sigma2: float = Field(0.25, gt=0)
    weight_strategy: WeightStrategy = "full"
    freeze_weights: bool = False

    # stagnation
    stagnation_tau: float = Field(1e-6, gt=0)

    # linear solver
    gmres_restart: int = Field(50, ge=1)
    gmres_max_iters: int = Field(1000, ge=1)

    # PIN^L
    pinl_training_size: int = Field(8, ge=1)
    pinl_components: int = Field(2, ge=1)
    pinl_subspace_rel_tol: float = Field(1e-2, gt=0)
    pinl_subspace_max_iters: int = Field(20, ge=1)

    verify: bool = False

    @field_validator("initial_weights")
    @classmethod
    def _non_negative_weights(cls, value: list[float] | None) -> list[float] | None:
        if value is not None and any(w < 0 for w in value):
            raise ValueError("initial_weights must be non-negative")
        return value

    @model_validator(mode="after")
    def _check_consistency(self) -> "SolverOptions":
        if self.forcing_min > self.forcing_max:
            raise ValueError("forcing_min must not exceed forcing_max")
        if self.pinl_components > self.pinl_training_size:
            raise ValueError("pinl_components (d) must not exceed pinl_training_size (s)")
        if self.pinl_training_size > self.max_newton_iters:
            raise ValueError("pinl_training_size (s) must not exceed max_newton_iters")
        return self


class IterationRecord(BaseModel):
    k: int = Field(..., ge=1)
    residual_norm: float = Field(..., ge=0)
    step_length: float = Field(..., gt=0)
    line_search_count: int = Field(..., ge=0)
    forcing_term: float
    stagnant: bool
    weight_min: float | None = None
    weight_max: float | None = None
    armijo_satisfied: bool = True
    merit_before: float | None = None
    merit_after: float | None = None
    directional_term: float | None = None
    linear_iterations: int = 0
    linear_relative_residual: float | None = None
    linear_model_norm: float | None = None


class PhaseSummary(BaseModel):
    """Training / subspace / global split of a PIN^L run."""

    inner: InnerSolverName
    training_iterations: int
    subspace_iterations: int
    global_iterations: int
    training_residual_norms: list[float] = []
    subspace_residual_norms: list[float] = []
    subspace_fallback: bool = False
    subspace_converged: bool = False
    # ||(I - PP^T) F_bar||, the least value the subspace stopping norm can reach
    subspace_floor: float | None = None
    training_converged: bool = False
    training_time: float = 0.0
    subspace_time: float = 0.0
    global_time: float = 0.0


class SolveReport(BaseModel):
    problem: str | None = None
    solver: str
    status: SolveStatus
    converged: bool
    n_ite: int
    wall_time: float
    n_sta: int
    initial_residual_norm: float
    final_residual_norm: float
    final_point: list[float]
    history: list[IterationRecord]
    phases: PhaseSummary | None = None
    message: str | None = None

    @model_validator(mode="after")
    def _check_counts(self) -> "SolveReport":
        if self.n_ite != len(self.history):
            raise ValueError("n_ite must equal the history length")
        if self.n_sta != sum(1 for r in self.history if r.stagnant):
            raise ValueError("n_sta must equal the number of stagnant records")
        return self


# ── Problems ──────────────────────────────────────────────────────────────────


class ProblemInfo(BaseModel):
    id: str
    name: str
    parameters: dict[str, Any]
    description: str


class ProblemListResponse(BaseModel):
    problems: list[ProblemInfo]


# ── Solve / Sweep ─────────────────────────────────────────────────────────────


class SolveRequest(BaseModel):
    problem: str = Field(..., description="Problem id: chemical, convdiff, p1 ... p5")
    params: dict[str, float | int] = {}
    solver: SolverName = "ardn"
    inner: InnerSolverName = "inb"
    options: dict[str, Any] = {}


class SweepRow(BaseModel):
    problem: str
    params: dict[str, float | int] = {}
    solver: SolverName
    inner: InnerSolverName = "inb"
    options: dict[str, Any] = {}


class SweepRequest(BaseModel):
    rows: list[SweepRow]
    jobs: int = Field(1, ge=1, le=32)


class SweepResult(BaseModel):
    row: int
    problem: str
    params: dict[str, float | int]
    solver: str
    inner: str | None
    options: dict[str, Any]
    n_ite: int | None = None
    wall_time: float | None = None
    n_sta: int | None = None
    converged: bool | None = None
    status: str | None = None
    error: str | None = None


class SweepResponse(BaseModel):
    results: list[SweepResult]
    errors: int
