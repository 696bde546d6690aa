"""
Pydantic schemas for copulopt.
These models validate solver parameters and define the JSON records the CLI emits.
"""
from pathlib import Path
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import get_settings

Sense = Literal["min", "max"]
GridMode = Literal["lower", "upper", "midpoint"]
SingularPolicy = Literal["clamp", "exclude-boundary-sample"]

SCHEMA_VERSION = 1


class Record(BaseModel):
    """Base for every JSON record; the schema version is always the first key."""
    schema_version: int = Field(SCHEMA_VERSION, alias="schema")

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2, by_alias=True) + "\n"


# ============================================================================
# Grid Schemas
# ============================================================================

class GridSpec(BaseModel):
    """Dyadic grid parameters for discretizing a cost function."""
    n: int = Field(..., ge=1, le=14, description="Refinement level; 2^n cells per axis.")
    mode: GridMode = Field("midpoint", description="Per-cell summary: sampled min, sampled max or center value.")
    subsamples: int = Field(
        default_factory=lambda: get_settings().GRID_SUBSAMPLES,
        ge=1,
        description="Sample points per axis per cell for extremum search.",
    )
    singular_policy: SingularPolicy = Field(
        "exclude-boundary-sample",
        description="How samples on a declared singular line are treated.",
    )

    model_config = ConfigDict(frozen=True)

    @property
    def cells_per_axis(self) -> int:
        return 2 ** self.n


class CouplingRecord(Record):
    """Serialized discrete coupling: permutation of cells plus the bound value."""
    n: int
    sigma: List[int]
    value: Optional[float] = None


# ============================================================================
# Copula Schemas
# ============================================================================

class ShuffleOfM(Record):
    """
    Shuffle of M with parameters {n, s, pi, omega}.

    Block i (1-based) maps [s_{i-1}, s_i) onto the square with y-range
    [t_{pi(i)-1}, t_{pi(i)}) along its diagonal (omega = +1) or its
    antidiagonal (omega = -1).
    """
    n: int = Field(..., ge=1)
    s: List[float]
    pi: List[int]
    omega: List[int]

    @model_validator(mode="after")
    def check_parameters(self):
        if len(self.s) != self.n + 1:
            raise ValueError(f"s must have n + 1 = {self.n + 1} entries, got {len(self.s)}")
        if self.s[0] != 0.0 or self.s[-1] != 1.0:
            raise ValueError("s must start at 0 and end at 1")
        if any(b <= a for a, b in zip(self.s, self.s[1:])):
            raise ValueError("s must be strictly increasing")
        if sorted(self.pi) != list(range(1, self.n + 1)):
            raise ValueError(f"pi must be a permutation of 1..{self.n}")
        if len(self.omega) != self.n or any(w not in (-1, 1) for w in self.omega):
            raise ValueError("omega must hold n entries from {-1, +1}")
        return self

    @classmethod
    def upper(cls) -> "ShuffleOfM":
        """The trivial shuffle carrying M = min(x, y)."""
        return cls(n=1, s=[0.0, 1.0], pi=[1], omega=[1])

    @classmethod
    def lower(cls) -> "ShuffleOfM":
        """The trivial shuffle carrying W = max(x + y - 1, 0)."""
        return cls(n=1, s=[0.0, 1.0], pi=[1], omega=[-1])

    def widths(self) -> np.ndarray:
        return np.diff(np.asarray(self.s, dtype=float))

    def t_partition(self) -> np.ndarray:
        """Partition of the y-axis making every block a square."""
        widths = self.widths()
        order = np.argsort(self.pi)  # block index occupying each y-slot
        return np.concatenate(([0.0], np.cumsum(widths[order])))

    def blocks(self) -> List[Tuple[float, float, float, float, int]]:
        """(x0, x1, y0, y1, omega) for every block, in x order."""
        t = self.t_partition()
        return [
            (self.s[i], self.s[i + 1], float(t[self.pi[i] - 1]), float(t[self.pi[i]]), self.omega[i])
            for i in range(self.n)
        ]


class CopulaReport(Record):
    """Outcome of checking the copula axioms on a lattice."""
    passed: bool
    grid: int
    check: Optional[Literal["grounding", "margin", "two_increasing", "frechet"]] = None
    point: Optional[Tuple[float, float]] = None
    rectangle: Optional[Tuple[float, float, float, float]] = None
    violation: float = 0.0


# ============================================================================
# Analytic Schemas
# ============================================================================

class MonotoneSolution(Record):
    """Closed-form optimum for costs with positive cross derivative."""
    sense: Sense
    value: float
    copula: Literal["M", "W"]


class UckelmannSolution(Record):
    """Optimal coupling for c(x, y) = phi(x + y) with concave-convex phi."""
    beta: Optional[float] = Field(None, description="Root in (0, 1); None on the antidiagonal branch.")
    value: float
    branch: Literal["shuffle", "antidiagonal"]
    residual: Optional[float] = Field(None, description="|g(beta)| at the returned root.")

    def support_map(self, x):
        """Gamma(x) = beta - x on [0, beta), x on [beta, 1]; 1 - x on the antidiagonal branch."""
        x = np.asarray(x, dtype=float)
        if self.branch == "antidiagonal":
            return 1.0 - x
        return np.where(x < self.beta, self.beta - x, x)


class CertificateReport(Record):
    """Numerical check of the c-convex potential certifying a concave-convex shuffle solution."""
    passed: bool
    grid: int
    beta: float
    worst_diagonal_gap: float
    worst_margin: float = Field(..., description="min over the lattice of f(xi) - psi(xi); negative means violation.")
    violations: int
    first_violation: Optional[Tuple[float, float]] = None


class AnalyticRecord(Record):
    """CLI output of the analytic command."""
    beta: Optional[float]
    value: float
    branch: Literal["shuffle", "antidiagonal"]
    certified: Optional[bool] = None
    certificate: Optional[CertificateReport] = None


class MonotoneRecord(Record):
    """CLI output of the analytic command for monotone costs."""
    max: float
    min: float


# ============================================================================
# Verification Schemas
# ============================================================================

class CycleReport(Record):
    """Outcome of a c-cyclical monotonicity check."""
    passed: bool = Field(..., alias="pass")
    sense: Sense
    worst_gap: float
    cycles_checked: int
    violating_cycle: Optional[List[Tuple[float, float]]] = None
    violation_gap: Optional[float] = None


class DoublyStochasticReport(Record):
    """Row/column sum check of a nonnegative square matrix."""
    passed: bool
    convention: Literal["coupling", "stochastic"]
    target: float
    worst_deviation: float
    failing_row: Optional[int] = None
    failing_column: Optional[int] = None


class InductiveCycleReport(Record):
    """Rectangle-term decomposition of a diagonal cycle gap."""
    passed: bool
    terms: List[float]
    total: float


class AssignmentRecord(Record):
    """Serialized assignment with its dual potentials."""
    sense: Sense
    sigma: List[int]
    value: float
    row_potentials: Optional[List[float]] = None
    col_potentials: Optional[List[float]] = None


# ============================================================================
# CLI Schemas
# ============================================================================

class BoundRow(BaseModel):
    """One grid level of a bounds table; absent modes stay None."""
    n: int
    lower: Optional[float] = None
    midpoint: Optional[float] = None
    upper: Optional[float] = None


class BoundsRecord(Record):
    """CLI output of the bounds command."""
    cost: str
    sense: Sense
    subsamples: int
    rows: List[BoundRow]


class CheckRecord(Record):
    """CLI output of the check command."""
    passed: bool
    cycle: CycleReport
    doubly_stochastic: Optional[DoublyStochasticReport] = None


# ============================================================================
# Run configuration
# ============================================================================

SOLVER_COMMANDS = {"bounds", "plot-support", "check"}


class RunConfig(BaseModel):
    """Validated options of one CLI invocation."""
    command: str
    cost: Optional[str] = None
    expr: Optional[str] = None
    n_min: int = Field(1, ge=1)
    n_max: int = Field(1, ge=1)
    mode: Literal["lower", "upper", "midpoint", "all"] = "all"
    sense: Sense = "max"
    subsamples: Optional[int] = Field(None, ge=1)
    output: Optional[Path] = None
    fmt: Literal["csv", "json", "svg"] = "csv"
    seed: int = Field(default_factory=lambda: get_settings().SEED)

    @model_validator(mode="after")
    def check_selectors(self):
        if self.command in SOLVER_COMMANDS and (self.cost is None) == (self.expr is None):
            raise ValueError("exactly one of --cost or --expr is required")
        if self.n_min > self.n_max:
            raise ValueError(f"empty n-range {self.n_min}..{self.n_max}")
        return self
