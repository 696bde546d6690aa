"""
Copulas on the unit square: Frechet-Hoeffding bounds, shuffles of M and
empirical copulas, with pointwise evaluation, axiom checks and integration of
cost functions against shuffle supports.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..config import get_settings
from ..errors import DomainError
from ..schemas import CopulaReport, ShuffleOfM
from ..services.quadrature import quadrature_1d
from .costfn import CostFunction
from .grid import DiscreteCoupling

logger = logging.getLogger(__name__)

EQUALITY_TOL = 1e-9
INCREASING_SLACK = 1e-12


def _unit_square(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if ((x < 0) | (x > 1) | (y < 0) | (y > 1) | np.isnan(x) | np.isnan(y)).any():
        raise DomainError("copula arguments must lie in [0, 1]^2")
    return np.broadcast_arrays(x, y)


def _scalar(out: np.ndarray):
    return float(out) if np.ndim(out) == 0 else out


def eval_frechet_upper(x, y):
    """M(x, y) = min(x, y)."""
    x, y = _unit_square(x, y)
    return _scalar(np.minimum(x, y))


def eval_frechet_lower(x, y):
    """W(x, y) = max(x + y - 1, 0)."""
    x, y = _unit_square(x, y)
    return _scalar(np.maximum(x + y - 1.0, 0.0))


# ============================================================================
# Shuffles of M
# ============================================================================

def _block_arrays(S: ShuffleOfM):
    blocks = np.array(S.blocks(), dtype=float)
    return blocks[:, 0], blocks[:, 1], blocks[:, 2], blocks[:, 3], blocks[:, 4]


def eval_shuffle(S: ShuffleOfM, x, y):
    """
    Mass of the shuffle on [0, x] x [0, y].

    Every block spreads mass uniformly along its diagonal (omega = +1) or
    antidiagonal (omega = -1); the contribution is the length of the segment
    part inside the query rectangle.
    """
    x, y = _unit_square(x, y)
    x0, x1, y0, y1, omega = _block_arrays(S)
    width = x1 - x0
    dx = np.clip(x[..., None] - x0, 0.0, width)
    diagonal = np.minimum(dx, np.clip(y[..., None] - y0, 0.0, width))
    antidiagonal = np.maximum(dx - np.clip(y1 - y[..., None], 0.0, width), 0.0)
    mass = np.where(omega > 0, diagonal, antidiagonal).sum(axis=-1)
    return _scalar(mass)


def support_map(S: ShuffleOfM) -> Callable[[np.ndarray], np.ndarray]:
    """Piecewise-linear Gamma_S whose graph carries the mass of S."""
    s = np.asarray(S.s, dtype=float)
    x0, _, y0, y1, omega = _block_arrays(S)

    def gamma(x):
        x = np.asarray(x, dtype=float)
        k = np.clip(np.searchsorted(s, x, side="right") - 1, 0, S.n - 1)
        offset = x - x0[k]
        out = np.where(omega[k] > 0, y0[k] + offset, y1[k] - offset)
        return _scalar(out)

    return gamma


def shuffle_from_coupling(coupling: DiscreteCoupling) -> ShuffleOfM:
    """Dyadic shuffle with pi = sigma + 1 and diagonal blocks."""
    m = coupling.size
    return ShuffleOfM(
        n=m,
        s=[i / m for i in range(m + 1)],
        pi=[j + 1 for j in coupling.sigma],
        omega=[1] * m,
    )


def integrate_against_shuffle(c: CostFunction, S: ShuffleOfM, quad_nodes: Optional[int] = None) -> float:
    """Sum over blocks of the integral of c(x, Gamma_S(x)), Gauss-Legendre per block."""
    if quad_nodes is None:
        quad_nodes = get_settings().QUAD_NODES
    if quad_nodes < 2:
        raise DomainError(f"quad_nodes must be >= 2, got {quad_nodes}")
    total = 0.0
    for x0, x1, y0, y1, omega in S.blocks():
        if omega > 0:
            total += quadrature_1d(lambda x: c(x, y0 + (x - x0)), x0, x1, quad_nodes)
        else:
            total += quadrature_1d(lambda x: c(x, y1 - (x - x0)), x0, x1, quad_nodes)
    return total


def integrate_against_copula(c: CostFunction, copula: str, quad_nodes: Optional[int] = None) -> float:
    """Integral of c against M ("upper") or W ("lower")."""
    shuffles = {"upper": ShuffleOfM.upper, "lower": ShuffleOfM.lower}
    if copula not in shuffles:
        raise DomainError(f"copula must be 'upper' or 'lower', got {copula!r}")
    return integrate_against_shuffle(c, shuffles[copula](), quad_nodes)


def measure_preservation(gamma: Callable, samples: int = 100_000, bins: int = 16, seed: Optional[int] = None) -> float:
    """
    Largest deviation of the histogram of gamma(U) from uniform, U ~ U[0, 1).

    A support map of a copula preserves Lebesgue measure, so the deviation
    shrinks like 1/sqrt(samples).
    """
    rng = np.random.default_rng(get_settings().SEED if seed is None else seed)
    u = rng.random(samples)
    image = np.clip(np.asarray(gamma(u), dtype=float), 0.0, np.nextafter(1.0, 0.0))
    counts = np.bincount(np.floor(image * bins).astype(np.int64), minlength=bins)
    return float(np.abs(counts / samples - 1.0 / bins).max())


# ============================================================================
# Axiom checks
# ============================================================================

def validate_copula(
    C: Callable,
    grid: int,
    tol: float = EQUALITY_TOL,
    slack: float = INCREASING_SLACK,
) -> CopulaReport:
    """
    Check grounding, margins, 2-increasingness and the Frechet sandwich on a grid x grid lattice.

    Returns the first failing check with its point or rectangle.
    """
    if grid < 2:
        raise DomainError(f"grid must be >= 2, got {grid}")
    t = np.linspace(0.0, 1.0, grid)
    X, Y = np.meshgrid(t, t, indexing="ij")
    V = np.asarray(C(X, Y), dtype=float)

    def fail(check, violation, point=None, rectangle=None):
        logger.info(f"Copula check {check} failed by {violation:.3g}")
        return CopulaReport(
            passed=False, grid=grid, check=check, point=point, rectangle=rectangle, violation=float(violation)
        )

    grounding = np.maximum(np.abs(V[:, 0]), np.abs(V[0, :]))
    if grounding.max() > tol:
        k = int(np.argmax(grounding))
        point = (float(t[k]), 0.0) if abs(V[k, 0]) > tol else (0.0, float(t[k]))
        return fail("grounding", grounding.max(), point=point)

    right = np.abs(V[:, -1] - t)
    top = np.abs(V[-1, :] - t)
    if right.max() > tol:
        k = int(np.argmax(right))
        return fail("margin", right[k], point=(float(t[k]), 1.0))
    if top.max() > tol:
        k = int(np.argmax(top))
        return fail("margin", top[k], point=(1.0, float(t[k])))

    mass = V[1:, 1:] - V[1:, :-1] - V[:-1, 1:] + V[:-1, :-1]
    bad = np.argwhere(mass < -slack)
    if bad.size:
        i, j = bad[0]
        return fail("two_increasing", -mass[i, j], rectangle=(float(t[i]), float(t[j]), float(t[i + 1]), float(t[j + 1])))

    excess = np.maximum(np.maximum(X + Y - 1.0, 0.0) - V, V - np.minimum(X, Y))
    bad = np.argwhere(excess > tol)
    if bad.size:
        i, j = bad[0]
        return fail("frechet", excess[i, j], point=(float(t[i]), float(t[j])))

    return CopulaReport(passed=True, grid=grid)


# ============================================================================
# Empirical copulas
# ============================================================================

@dataclass(frozen=True)
class EmpiricalCopula:
    """
    Cumulative frequencies on the (r + 1) x (r + 1) lattice.

    counts[a, b] is the number of points with x < a/r and y < b/r.
    """
    resolution: int
    counts: np.ndarray
    size: int

    def lattice(self) -> np.ndarray:
        return self.counts / self.size

    def __call__(self, x, y):
        x, y = _unit_square(x, y)
        r = self.resolution
        a = np.floor(x * r + 1e-9).astype(np.int64)
        b = np.floor(y * r + 1e-9).astype(np.int64)
        return _scalar(self.counts[a, b] / self.size)

    def margin_deviation(self) -> float:
        """Largest distance of either empirical margin from the uniform one on the lattice."""
        t = np.arange(self.resolution + 1) / self.resolution
        grid = self.lattice()
        return float(max(np.abs(grid[:, -1] - t).max(), np.abs(grid[-1, :] - t).max()))


def empirical_copula(points, r: int) -> EmpiricalCopula:
    """
    Empirical a.d.f. of a bivariate point sequence at resolution r.

    Args:
        points: (N, 2) array-like with every point in [0, 1)^2
        r: lattice resolution, >= 1
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if r < 1:
        raise DomainError(f"resolution must be >= 1, got {r}")
    if len(pts) == 0:
        raise DomainError("empirical copula needs at least one point")
    outside = np.flatnonzero(((pts < 0) | (pts >= 1) | np.isnan(pts)).any(axis=1))
    if outside.size:
        k = int(outside[0])
        raise DomainError(f"point {k} = ({pts[k, 0]}, {pts[k, 1]}) is outside [0, 1)^2")

    cells = np.minimum(np.floor(pts * r).astype(np.int64), r - 1)
    hist = np.zeros((r + 1, r + 1), dtype=np.int64)
    np.add.at(hist, (cells[:, 0] + 1, cells[:, 1] + 1), 1)
    counts = hist.cumsum(axis=0).cumsum(axis=1)
    return EmpiricalCopula(resolution=r, counts=counts, size=len(pts))
