"""
Closed-form optimizers.

Two families are solved exactly:

- costs with positive cross derivative, where the maximizing copula is M and
  the minimizing one is W;
- costs c(x, y) = phi(x + y) with phi concave on [0, k) and convex on (k, 2],
  where the maximizer is supported on the antidiagonal of [0, beta]^2 followed
  by the diagonal of [beta, 1]^2, with beta the root of
  phi(2b) - phi(b) - b * phi'(b) = 0.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from ..config import get_settings
from ..errors import DomainError, HypothesisError, NumericError
from ..schemas import CertificateReport, MonotoneSolution, Sense, UckelmannSolution
from ..services.quadrature import find_root_bisect, quadrature_1d
from .costfn import CostFunction

logger = logging.getLogger(__name__)

SHAPE_STEP = 1e-2
SHAPE_TOL = 1e-6
DERIVATIVE_STEP = 1e-6
CROSS_LATTICE = 17
CROSS_STEP = 1e-4
SCAN_POINTS = 1024
ROOT_TOL = 1e-10
NUMERIC_ROOT_TOL = 1e-7
CERTIFY_TOL = 1e-9


# ============================================================================
# Phi specifications
# ============================================================================

def second_difference(phi: Callable, z, h: float = SHAPE_STEP) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    return (phi(z + h) - 2.0 * phi(z) + phi(z - h)) / (h * h)


def locate_inflection(phi: Callable, h: float = SHAPE_STEP) -> float:
    """
    Point in (0, 2) where phi switches from concave to convex.

    Scans the second difference on [h, 2 - h] for its first sign change from
    negative to positive and refines it by bisection.
    """
    z = np.linspace(h, 2.0 - h, 2001)
    d2 = second_difference(phi, z, h)
    changes = np.flatnonzero((d2[:-1] < 0) & (d2[1:] >= 0))
    if changes.size == 0:
        raise HypothesisError("phi has no concave-to-convex inflection in (0, 2)")
    i = int(changes[0])
    try:
        root = find_root_bisect(
            lambda t: float(second_difference(phi, t, 1e-4)), z[i], z[i + 1], tol=1e-12
        ).root
    except DomainError:
        # the finer difference kept one sign on the bracket
        root = 0.5 * (z[i] + z[i + 1])
    logger.debug(f"Inflection located at {root:.12g}")
    return float(root)


@dataclass(frozen=True)
class PhiSpec:
    """
    phi on [0, 2] with optional exact derivative and inflection point k.

    Missing pieces are filled numerically: dphi by central differences with
    step 1e-6, k by locate_inflection.
    """
    phi: Callable[[np.ndarray], np.ndarray]
    dphi: Optional[Callable[[np.ndarray], np.ndarray]] = None
    inflection: Optional[float] = None
    source: str = "phi"

    def value(self, z):
        return self.phi(np.asarray(z, dtype=float))

    def derivative(self, z):
        z = np.asarray(z, dtype=float)
        if self.dphi is not None:
            return self.dphi(z)
        return (self.phi(z + DERIVATIVE_STEP) - self.phi(z - DERIVATIVE_STEP)) / (2.0 * DERIVATIVE_STEP)

    def validated(self) -> "PhiSpec":
        """Return a spec with k resolved, after checking the concave/convex shape."""
        k = self.inflection if self.inflection is not None else locate_inflection(self.phi)
        h = SHAPE_STEP
        if not 2 * h < k < 2.0 - 2 * h:
            raise HypothesisError(f"inflection k={k} must lie in (0, 2)")

        concave = np.linspace(h, k - h, 512)
        d2 = second_difference(self.phi, concave, h)
        if not np.isfinite(d2).all() or d2.max() > SHAPE_TOL:
            bad = concave[int(np.nanargmax(np.where(np.isfinite(d2), d2, np.inf)))]
            raise HypothesisError(f"phi is not concave on [0, {k:.6g}): second difference > 0 at z={bad:.6g}")

        convex = np.linspace(k + h, 2.0 - h, 512)
        d2 = second_difference(self.phi, convex, h)
        if not np.isfinite(d2).all() or d2.min() < -SHAPE_TOL:
            bad = convex[int(np.nanargmin(np.where(np.isfinite(d2), d2, -np.inf)))]
            raise HypothesisError(f"phi is not convex on ({k:.6g}, 2]: second difference < 0 at z={bad:.6g}")

        return PhiSpec(phi=self.phi, dphi=self.dphi, inflection=float(k), source=self.source)

    def stationarity(self, b):
        """g(b) = phi(2b) - phi(b) - b * phi'(b)."""
        b = np.asarray(b, dtype=float)
        return self.phi(2.0 * b) - self.phi(b) - b * self.derivative(b)

    def as_cost(self) -> CostFunction:
        phi = self.phi
        return CostFunction(
            source=f"{self.source}(x+y)",
            evaluator=lambda x, y: phi(x + y),
            claims_separable_phi=True,
        )


# ============================================================================
# Positive cross derivative
# ============================================================================

def check_cross_derivative(c: CostFunction) -> None:
    """Raise HypothesisError unless d2c/dxdy > 0 on a 17 x 17 interior lattice."""
    t = np.arange(1, CROSS_LATTICE + 1) / (CROSS_LATTICE + 1)
    x, y = np.meshgrid(t, t, indexing="ij")
    h = CROSS_STEP
    cross = (c(x + h, y + h) - c(x + h, y - h) - c(x - h, y + h) + c(x - h, y - h)) / (4 * h * h)
    bad = np.argwhere(~(cross > 0))
    if bad.size:
        i, j = bad[0]
        raise HypothesisError(
            f"cross derivative of {c.source} is not positive at "
            f"({x[i, j]:.6g}, {y[i, j]:.6g}): {cross[i, j]:.6g}"
        )


def solve_monotone(c: CostFunction, sense: Sense = "max", quad_nodes: Optional[int] = None) -> MonotoneSolution:
    """
    Optimum over all copulas for a cost with positive cross derivative.

    Returns:
        max: integral of c(x, x), attained by M
        min: integral of c(x, 1 - x), attained by W
    """
    if not c.claims_positive_cross_derivative:
        logger.info(f"{c.source} does not claim a positive cross derivative; checking numerically")
    check_cross_derivative(c)
    if sense == "max":
        value = quadrature_1d(lambda x: c(x, x), 0.0, 1.0, quad_nodes)
        return MonotoneSolution(sense=sense, value=value, copula="M")
    value = quadrature_1d(lambda x: c(x, 1.0 - x), 0.0, 1.0, quad_nodes)
    return MonotoneSolution(sense=sense, value=value, copula="W")


# ============================================================================
# Concave-convex phi(x + y)
# ============================================================================

def _find_beta(spec: PhiSpec, tol: float) -> Optional[float]:
    k = spec.inflection
    lo_limit, hi_limit = k / 2.0, min(k, 1.0)
    z = np.linspace(0.0, 1.0, SCAN_POINTS + 2)[1:-1]
    g = spec.stationarity(z)
    for i in range(len(z) - 1):
        a, b = z[i], z[i + 1]
        if b <= lo_limit or a >= hi_limit:
            continue
        if not (np.isfinite(g[i]) and np.isfinite(g[i + 1])) or g[i] * g[i + 1] > 0:
            continue
        root = find_root_bisect(lambda t: float(spec.stationarity(t)), a, b, tol).root
        if lo_limit < root < hi_limit:
            return root
    return None


def solve_uckelmann(spec: PhiSpec, tol: float = 1e-15, quad_nodes: Optional[int] = None) -> UckelmannSolution:
    """
    Maximize the integral of phi(x + y) over all copulas.

    Args:
        spec: concave-convex phi; validated here
        tol: bisection tolerance on beta
        quad_nodes: Gauss-Legendre nodes for the value integral

    Returns:
        UckelmannSolution; branch "antidiagonal" when no root exists in
        (k/2, min(k, 1)), in which case W is optimal and the value is phi(1)
    """
    spec = spec.validated()
    beta = _find_beta(spec, tol)
    if beta is None:
        logger.info(f"No stationary point for {spec.source}; the antidiagonal coupling is optimal")
        return UckelmannSolution(beta=None, value=float(spec.value(1.0)), branch="antidiagonal")

    residual = abs(float(spec.stationarity(beta)))
    # a difference-quotient derivative leaves noise of order 1e-10 in g
    limit = ROOT_TOL if spec.dphi is not None else NUMERIC_ROOT_TOL
    if residual >= limit:
        raise NumericError(f"beta={beta!r} leaves residual {residual:.3g}")
    value = beta * float(spec.value(beta)) + quadrature_1d(lambda x: spec.value(2.0 * x), beta, 1.0, quad_nodes)
    logger.info(f"Solved {spec.source}: beta={beta!r} value={value:.12g}")
    return UckelmannSolution(beta=beta, value=value, branch="shuffle", residual=residual)


def certify_uckelmann(spec: PhiSpec, sol: UckelmannSolution, grid: Optional[int] = None) -> CertificateReport:
    """
    Check the c-convex potential f and its supporting functions psi on a grid x grid lattice.

    With y = Gamma(x), psi_y(x) must equal f(x) and psi_y(xi) <= f(xi) for
    every xi; both hold to 1e-9 for an optimal beta.
    """
    if sol.beta is None or not 0.0 < sol.beta < 1.0:
        raise DomainError("certificate needs a solution with beta in (0, 1)")
    if grid is None:
        grid = get_settings().CERTIFY_GRID
    if grid < 2:
        raise DomainError(f"certificate grid must be >= 2, got {grid}")

    beta = float(sol.beta)
    phi = spec.value
    d_beta = float(spec.derivative(beta))
    phi_beta, phi_2beta = float(phi(beta)), float(phi(2.0 * beta))

    t = np.linspace(0.0, 1.0, grid)
    f = np.where(t < beta, t * d_beta, 0.5 * (phi(2.0 * t) - phi_2beta) + beta * d_beta)

    x = t[:, None]
    xi = t[None, :]
    psi_low = phi(beta - x + xi) + x * d_beta - phi_beta
    psi_high = phi(x + xi) - 0.5 * phi(2.0 * x) - 0.5 * phi_2beta + beta * d_beta
    psi = np.where(x < beta, psi_low, psi_high)

    diagonal_gap = np.abs(np.diag(psi) - f)
    margin = f[None, :] - psi
    bad = (margin < -CERTIFY_TOL) | np.diag(diagonal_gap >= CERTIFY_TOL)
    violations = np.argwhere(bad)
    first = None
    if violations.size:
        i, j = violations[0]
        first = (float(t[i]), float(t[j]))

    report = CertificateReport(
        passed=violations.size == 0,
        grid=grid,
        beta=beta,
        worst_diagonal_gap=float(diagonal_gap.max()),
        worst_margin=float(margin.min()),
        violations=int(len(violations)),
        first_violation=first,
    )
    logger.info(f"Certificate for beta={beta!r} on {grid}x{grid}: passed={report.passed}")
    return report


def h_alpha(c: CostFunction, alpha: float, quad_nodes: Optional[int] = None) -> float:
    """H(alpha) = int_0^alpha c(x, alpha - x) dx + int_alpha^1 c(x, x) dx."""
    head = quadrature_1d(lambda x: c(x, alpha - x), 0.0, alpha, quad_nodes) if alpha > 0 else 0.0
    tail = quadrature_1d(lambda x: c(x, x), alpha, 1.0, quad_nodes) if alpha < 1 else 0.0
    return head + tail


def scan_h_alpha(c: CostFunction, alphas: Iterable[float], quad_nodes: Optional[int] = None) -> np.ndarray:
    return np.array([h_alpha(c, float(a), quad_nodes) for a in alphas])
