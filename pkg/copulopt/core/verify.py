"""
Optimality diagnostics for couplings.

c-cyclical monotonicity (min sense): for every cycle of support points
(x_0, y_0), ..., (x_N, y_N),

    sum_k c(x_k, y_k) <= sum_k c(x_{k+1}, y_k),   x_{N+1} = x_0.

The max sense reverses the inequality. A check reports the gap
left - right (min) or right - left (max); positive gaps are violations.
"""
import logging
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from ..config import get_settings
from ..errors import DomainError, InvalidMatrixError
from ..schemas import CycleReport, DoublyStochasticReport, InductiveCycleReport, Sense
from .costfn import CostFunction

logger = logging.getLogger(__name__)

GAP_TOL = 1e-10
PAIR_CHUNK = 512


@dataclass(frozen=True)
class SupportSet:
    points: np.ndarray
    sense: Sense = "max"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if len(pts) == 0:
            raise DomainError("support set is empty")
        object.__setattr__(self, "points", pts)

    @property
    def xs(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def ys(self) -> np.ndarray:
        return self.points[:, 1]


def check_cyclical_monotonicity(
    support: SupportSet,
    c: CostFunction,
    max_cycle: Optional[int] = None,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
) -> CycleReport:
    """
    Test the support for c-cyclical monotonicity.

    All pairs are checked exhaustively; for each length 3..max_cycle,
    `trials` cycles are drawn (with replacement) from a generator seeded with
    `seed`. The first violating cycle in scan order is reported.
    """
    settings = get_settings()
    max_cycle = settings.CYCLE_MAX_LENGTH if max_cycle is None else max_cycle
    trials = settings.CYCLE_TRIALS if trials is None else trials
    seed = settings.SEED if seed is None else seed
    if max_cycle < 2:
        raise DomainError(f"max_cycle must be >= 2, got {max_cycle}")
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")

    x, y = support.xs, support.ys
    sign = 1.0 if support.sense == "min" else -1.0
    n = len(x)
    diagonal = np.asarray(c(x, y), dtype=float)

    worst = -np.inf
    checked = 0
    violation = None

    # length 2: gap(i, j) = d_i + d_j - c(x_j, y_i) - c(x_i, y_j)
    for start in range(0, n, PAIR_CHUNK):
        rows = np.arange(start, min(start + PAIR_CHUNK, n))
        forward = np.asarray(c(x[rows, None], y[None, :]), dtype=float)   # c(x_i, y_j)
        backward = np.asarray(c(x[None, :], y[rows, None]), dtype=float)  # c(x_j, y_i)
        gaps = sign * (diagonal[rows, None] + diagonal[None, :] - backward - forward)
        upper = np.arange(n)[None, :] > rows[:, None]
        gaps = np.where(upper, gaps, -np.inf)
        checked += int(upper.sum())
        if upper.any():
            worst = max(worst, float(gaps.max()))
        if violation is None:
            bad = np.argwhere(gaps > GAP_TOL)
            if bad.size:
                r, j = bad[0]
                violation = ([int(rows[r]), int(j)], float(gaps[r, j]))

    rng = np.random.default_rng(seed)
    for length in range(3, max_cycle + 1):
        idx = rng.integers(0, n, size=(trials, length))
        own = np.asarray(c(x[idx], y[idx]), dtype=float).sum(axis=1)
        shifted = np.asarray(c(x[np.roll(idx, -1, axis=1)], y[idx]), dtype=float).sum(axis=1)
        gaps = sign * (own - shifted)
        checked += trials
        worst = max(worst, float(gaps.max()))
        if violation is None:
            bad = np.flatnonzero(gaps > GAP_TOL)
            if bad.size:
                violation = ([int(k) for k in idx[bad[0]]], float(gaps[bad[0]]))

    if not np.isfinite(worst):
        worst = 0.0
    report = CycleReport(
        passed=violation is None,
        sense=support.sense,
        worst_gap=worst,
        cycles_checked=checked,
        violating_cycle=None if violation is None else [(float(x[k]), float(y[k])) for k in violation[0]],
        violation_gap=None if violation is None else violation[1],
    )
    logger.info(f"Cyclical monotonicity ({support.sense}) on {n} points: passed={report.passed} worst={worst:.3g}")
    return report


def check_doubly_stochastic(
    matrix,
    tol: float = 1e-12,
    convention: Literal["coupling", "stochastic"] = "coupling",
) -> DoublyStochasticReport:
    """
    Row and column sums of a nonnegative square matrix.

    convention "coupling" expects every sum to be 1/m (cell masses of a
    discrete coupling), "stochastic" expects 1.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise InvalidMatrixError(f"matrix must be square and nonempty, got shape {a.shape}")
    negative = np.argwhere(a < 0)
    if negative.size:
        i, j = negative[0]
        raise DomainError(f"negative entry {a[i, j]} at ({i}, {j})")

    m = a.shape[0]
    target = 1.0 / m if convention == "coupling" else 1.0
    row_dev = np.abs(a.sum(axis=1) - target)
    col_dev = np.abs(a.sum(axis=0) - target)
    failing_row = int(np.argmax(row_dev)) if row_dev.max() > tol else None
    failing_column = int(np.argmax(col_dev)) if col_dev.max() > tol else None
    return DoublyStochasticReport(
        passed=failing_row is None and failing_column is None,
        convention=convention,
        target=target,
        worst_deviation=float(max(row_dev.max(), col_dev.max())),
        failing_row=failing_row,
        failing_column=failing_column,
    )


def diagonal_cycle_certificate(c: CostFunction, xs: Sequence[float], tol: float = GAP_TOL) -> InductiveCycleReport:
    """
    Decompose the max-sense gap of a cycle on the diagonal into rectangle terms.

    The cycle is rotated so its largest point x_N comes last, then x_N is
    removed; the change of gap is

        c(x_N, x_{N-1}) - c(x_0, x_{N-1}) + c(x_0, x_N) - c(x_N, x_N),

    a rectangle sum that is <= 0 whenever the cross derivative is positive.
    The 2-cycle that remains contributes the last term. The terms add up to
    the gap of the original cycle.
    """
    cycle = [float(v) for v in xs]
    if not cycle:
        raise DomainError("cycle is empty")
    terms = []
    while len(cycle) > 2:
        top = int(np.argmax(cycle))
        cycle = cycle[top + 1:] + cycle[:top + 1]
        first, prev, last = cycle[0], cycle[-2], cycle[-1]
        terms.append(float(c(last, prev) - c(first, prev) + c(first, last) - c(last, last)))
        cycle.pop()
    if len(cycle) == 2:
        a, b = cycle
        terms.append(float(c(b, a) + c(a, b) - c(a, a) - c(b, b)))
    total = float(sum(terms))
    return InductiveCycleReport(passed=all(t <= tol for t in terms), terms=terms, total=total)
