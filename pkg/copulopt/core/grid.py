"""
Dyadic grid discretization of the copula extremal problem.

The unit square is split into 4^n cells I(i, j) = [i/2^n, (i+1)/2^n) x
[j/2^n, (j+1)/2^n) (0-based). Summarizing the cost on every cell and solving
the assignment problem over the 2^n x 2^n matrix yields the bound, and the
optimal permutation is a discrete coupling of mass 2^-n per occupied cell.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..config import get_settings
from ..errors import DomainError, NumericError
from ..schemas import CouplingRecord, GridMode, GridSpec, Sense
from .costfn import CostFunction
from .lap import solve_lap

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridCostMatrix:
    n: int
    mode: GridMode
    values: np.ndarray

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def as_cost(self) -> CostFunction:
        """Step cost equal to values[i, j] on cell (i, j)."""
        return CostFunction.piecewise_constant(self.values, source=f"grid(n={self.n}, mode={self.mode})")


@dataclass(frozen=True)
class DiscreteCoupling:
    """Permutation coupling on the 2^n grid; sigma[i] is the column of row i."""
    n: int
    sigma: Tuple[int, ...]
    value: Optional[float] = None

    @property
    def size(self) -> int:
        return len(self.sigma)

    @property
    def mass(self) -> float:
        return 2.0 ** -self.n

    def matrix(self) -> np.ndarray:
        m = self.size
        out = np.zeros((m, m))
        out[np.arange(m), np.asarray(self.sigma)] = self.mass
        return out

    def to_record(self) -> CouplingRecord:
        return CouplingRecord(n=self.n, sigma=list(self.sigma), value=self.value)

    @classmethod
    def from_record(cls, record: CouplingRecord) -> "DiscreteCoupling":
        if len(record.sigma) != 2 ** record.n or sorted(record.sigma) != list(range(2 ** record.n)):
            raise DomainError(f"sigma must be a permutation of 0..{2 ** record.n - 1}")
        return cls(n=record.n, sigma=tuple(record.sigma), value=record.value)


def sample_offsets(subsamples: int) -> np.ndarray:
    """
    Relative sample positions inside a cell.

    One sample is the center. Otherwise corners are always included, and the
    center is added when an even count of at least 3 would miss it.
    """
    if subsamples == 1:
        return np.array([0.5])
    offsets = np.linspace(0.0, 1.0, subsamples)
    if subsamples >= 3 and subsamples % 2 == 0:
        offsets = np.sort(np.append(offsets, 0.5))
    return offsets


def _midpoint_values(c: CostFunction, m: int) -> np.ndarray:
    t = (np.arange(m) + 0.5) / m
    values = np.asarray(c(t[:, None], t[None, :]), dtype=float)
    bad = np.argwhere(~np.isfinite(values))
    if bad.size:
        i, j = bad[0]
        raise NumericError(f"{c.source} is not finite at the center of cell ({i}, {j})")
    return values


def _extremum_values(c: CostFunction, spec: GridSpec) -> np.ndarray:
    m = spec.cells_per_axis
    offsets = sample_offsets(spec.subsamples)
    k = len(offsets)
    ys = ((np.arange(m)[:, None] + offsets[None, :]) / m).ravel()
    exclude = spec.singular_policy == "exclude-boundary-sample"
    reduce = np.nanmin if spec.mode == "lower" else np.nanmax

    values = np.empty((m, m))
    excluded = 0
    for i in range(m):
        xs = (i + offsets) / m
        block = np.asarray(c(xs[:, None], ys[None, :]), dtype=float)
        masked = np.zeros(block.shape, dtype=bool)
        if exclude:
            if "x" in c.singular_axes:
                masked[xs == 0.0, :] = True
            if "y" in c.singular_axes:
                masked[:, ys == 0.0] = True
            excluded += int(masked.sum())
        bad = np.argwhere(~np.isfinite(block) & ~masked)
        if bad.size:
            j = int(bad[0][1]) // k
            raise NumericError(f"{c.source} is not finite on samples of cell ({i}, {j})")
        block = np.where(masked, np.nan, block).reshape(k, m, k)
        values[i] = reduce(block, axis=(0, 2))
    if excluded:
        logger.info(f"Excluded {excluded} samples on singular lines of {c.source} at n={spec.n}")
    return values


def build_matrix(c: CostFunction, spec: GridSpec) -> GridCostMatrix:
    """
    Summarize c on every cell of the level-n grid.

    Args:
        c: cost function
        spec: level, mode, subsamples and singular policy

    Returns:
        GridCostMatrix whose entry (i, j) is the sampled minimum (lower),
        sampled maximum (upper) or center value (midpoint) on cell (i, j)
    """
    m = spec.cells_per_axis
    if spec.mode == "midpoint":
        values = _midpoint_values(c, m)
    else:
        values = _extremum_values(c, spec)
    logger.debug(f"Built {spec.mode} matrix for {c.source} at n={spec.n} ({m}x{m})")
    return GridCostMatrix(n=spec.n, mode=spec.mode, values=values)


def bound(c: CostFunction, spec: GridSpec, sense: Sense = "max") -> Tuple[float, DiscreteCoupling]:
    """Grid bound 2^-n * LAP(matrix) and its optimal coupling."""
    max_level = get_settings().GRID_MAX_LEVEL
    if spec.n > max_level:
        raise DomainError(f"grid level n={spec.n} exceeds GRID_MAX_LEVEL={max_level}")
    matrix = build_matrix(c, spec)
    assignment = solve_lap(matrix.values, sense)
    value = assignment.value / spec.cells_per_axis
    logger.info(f"{c.source} n={spec.n} mode={spec.mode} sense={sense}: {value:.12g}")
    return value, DiscreteCoupling(n=spec.n, sigma=assignment.sigma, value=value)


def bound_sequence(
    c: CostFunction,
    n_max: int,
    mode: GridMode = "midpoint",
    sense: Sense = "max",
    n_min: int = 1,
    subsamples: Optional[int] = None,
) -> List[Tuple[int, float]]:
    """Bounds for n = n_min..n_max."""
    max_level = get_settings().GRID_MAX_LEVEL
    if not 1 <= n_min <= n_max <= max_level:
        raise DomainError(f"levels must satisfy 1 <= n_min <= n_max <= {max_level}, got {n_min}..{n_max}")
    extra = {} if subsamples is None else {"subsamples": subsamples}
    return [
        (n, bound(c, GridSpec(n=n, mode=mode, **extra), sense)[0])
        for n in range(n_min, n_max + 1)
    ]


def support_points(coupling: DiscreteCoupling) -> np.ndarray:
    """Cell centers ((i + 1/2) / 2^n, (sigma(i) + 1/2) / 2^n) as an (m, 2) array sorted by x."""
    m = coupling.size
    x = (np.arange(m) + 0.5) / m
    y = (np.asarray(coupling.sigma) + 0.5) / m
    return np.column_stack([x, y])
