"""
Van der Corput sequences and uniform distribution experiments.

Sequences start at n = 1 unless a start index is given; phi_b(0) = 0.
"""
import logging
from dataclasses import dataclass

import numpy as np

from ..core.costfn import CostFunction
from ..core.lap import solve_lap
from ..errors import DomainError
from ..schemas import Sense

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VdcParams:
    base: int
    count: int
    start: int = 1

    def __post_init__(self):
        if self.base < 2:
            raise DomainError(f"base must be >= 2, got {self.base}")
        if self.count < 1:
            raise DomainError(f"count must be >= 1, got {self.count}")
        if self.start < 0:
            raise DomainError(f"start index must be >= 0, got {self.start}")


def vdc(n: int, b: int = 2) -> float:
    """
    Radical inverse of n in base b.

    Example:
        >>> vdc(5, 3)  # 5 = (12)_3 -> (0.21)_3
        0.7777777777777778
    """
    if b < 2:
        raise DomainError(f"base must be >= 2, got {b}")
    if n < 0:
        raise DomainError(f"index must be >= 0, got {n}")
    num, den = 0, 1
    while n:
        n, digit = divmod(n, b)
        num = num * b + digit
        den *= b
    return num / den


def vdc_sequence(b: int, count: int, start: int = 1) -> np.ndarray:
    """phi_b(start), ..., phi_b(start + count - 1); identical to vdc element by element."""
    VdcParams(base=b, count=count, start=start)
    n = np.arange(start, start + count, dtype=np.int64)
    num = np.zeros_like(n)
    den = np.ones_like(n)
    while (n > 0).any():
        active = n > 0
        digit = n % b
        num = np.where(active, num * b + digit, num)
        den = np.where(active, den * b, den)
        n = n // b
    return num / den


def avg_consecutive_distance(b: int, N: int) -> float:
    """(1/N) * sum_{n=0}^{N-1} |phi_b(n+1) - phi_b(n)|; tends to 2(b-1)/b^2."""
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    values = vdc_sequence(b, N + 1, start=0)
    return float(np.abs(np.diff(values)).sum() / N)


def consecutive_pairs(b: int, N: int, start: int = 1) -> np.ndarray:
    """(phi_b(n), phi_b(n+1)) for n = start .. start + N - 1, as an (N, 2) array."""
    values = vdc_sequence(b, N + 1, start)
    return np.column_stack([values[:-1], values[1:]])


def empirical_limit_average(xs, ys, c: CostFunction) -> float:
    """(1/N) * sum c(x_n, y_n)."""
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if len(xs) != len(ys):
        raise DomainError(f"sequence lengths differ: {len(xs)} != {len(ys)}")
    if len(xs) == 0:
        raise DomainError("sequences are empty")
    return float(np.mean(c(xs, ys)))


def interval_frequencies(xs, bins: int = 16) -> np.ndarray:
    """Share of points falling in each [k/bins, (k+1)/bins)."""
    xs = np.asarray(xs, dtype=float).ravel()
    if bins < 1:
        raise DomainError(f"bins must be >= 1, got {bins}")
    cells = np.clip(np.floor(xs * bins).astype(np.int64), 0, bins - 1)
    return np.bincount(cells, minlength=bins) / len(xs)


def empirical_assignment_bound(xs, ys, c: CostFunction, sense: Sense = "max") -> float:
    """
    Optimal value of the integral of c over couplings of the two empirical marginals.

    This is the assignment problem on c(x_i, y_j) divided by N.
    """
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if len(xs) != len(ys) or len(xs) == 0:
        raise DomainError("empirical marginals need the same positive number of points")
    value = solve_lap(c(xs[:, None], ys[None, :]), sense).value / len(xs)
    logger.debug(f"Empirical assignment bound for {c.source} with N={len(xs)}: {value:.12g}")
    return value
