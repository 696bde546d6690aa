"""
One-dimensional quadrature and root finding helpers.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import optimize

from ..config import get_settings
from ..errors import DomainError, NumericError

logger = logging.getLogger(__name__)

MAX_BISECTION_ITERATIONS = 200


@lru_cache(maxsize=64)
def gauss_legendre(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    if nodes < 1:
        raise DomainError(f"quadrature needs at least one node, got {nodes}")
    x, w = np.polynomial.legendre.leggauss(nodes)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def quadrature_1d(f: Callable, a: float, b: float, nodes: Optional[int] = None) -> float:
    """
    Gauss-Legendre approximation of the integral of f over [a, b].

    f is called once with the array of mapped nodes.
    """
    if nodes is None:
        nodes = get_settings().QUAD_NODES
    if not a < b:
        if a == b:
            return 0.0
        raise DomainError(f"integration bounds must satisfy a < b, got [{a}, {b}]")
    x, w = gauss_legendre(nodes)
    half = 0.5 * (b - a)
    values = np.asarray(f(half * x + 0.5 * (a + b)), dtype=float)
    if not np.isfinite(values).all():
        raise NumericError(f"non-finite integrand on [{a}, {b}]")
    return float(half * np.dot(w, np.broadcast_to(values, x.shape)))


@dataclass(frozen=True)
class RootResult:
    root: float
    residual: float
    iterations: int


def find_root_bisect(g: Callable[[float], float], lo: float, hi: float, tol: float = 1e-15) -> RootResult:
    """
    Bisection root of g on [lo, hi].

    Raises:
        DomainError: no sign change between lo and hi
        NumericError: non-finite evaluation or no convergence in 200 iterations
    """
    def checked(x: float) -> float:
        value = float(g(x))
        if not np.isfinite(value):
            raise NumericError(f"non-finite value {value} at {x!r}")
        return value

    g_lo, g_hi = checked(lo), checked(hi)
    if g_lo == 0.0:
        return RootResult(root=float(lo), residual=0.0, iterations=0)
    if g_hi == 0.0:
        return RootResult(root=float(hi), residual=0.0, iterations=0)
    if g_lo * g_hi > 0:
        raise DomainError(f"no sign change on [{lo}, {hi}]")

    try:
        root, info = optimize.bisect(
            checked, lo, hi, xtol=tol, maxiter=MAX_BISECTION_ITERATIONS, full_output=True
        )
    except NumericError:
        raise
    except RuntimeError as exc:
        raise NumericError(f"bisection failed on [{lo}, {hi}]: {exc}") from exc
    residual = abs(checked(root))
    logger.debug(f"Bisection root {root!r} after {info.iterations} iterations, |g|={residual:.3g}")
    return RootResult(root=float(root), residual=residual, iterations=info.iterations)
