"""
Linear sum assignment.

solve_lap runs the shortest-augmenting-path form of the Hungarian method with
row and column potentials, so every result carries its own optimality
certificate. Among optimal permutations the lexicographically smallest one is
returned; brute_force_lap enumerates permutations and is the test oracle.
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..config import get_settings
from ..errors import InvalidMatrixError
from ..schemas import AssignmentRecord, Sense

logger = logging.getLogger(__name__)

MAX_SIZE = 2 ** 14
BRUTE_FORCE_MAX_SIZE = 10


@dataclass(frozen=True)
class Assignment:
    """Optimal permutation with objective value and dual potentials (0-based columns)."""
    sigma: Tuple[int, ...]
    value: float
    sense: Sense
    row_potentials: Optional[np.ndarray] = None
    col_potentials: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return len(self.sigma)

    def dual_gap(self) -> float:
        """|sum(u) + sum(v) - value|; zero up to rounding for solver output."""
        if self.row_potentials is None or self.col_potentials is None:
            raise ValueError("assignment carries no potentials")
        return abs(float(self.row_potentials.sum() + self.col_potentials.sum()) - self.value)

    def check_certificate(self, cost) -> bool:
        """
        Verify strong duality, dual feasibility and complementary slackness.

        The tolerance is 1e-9 * m * max|cost|. For the max sense the
        feasibility inequality is reversed: u_i + v_j >= cost[i, j].
        """
        a = _as_cost_matrix(cost)
        m = a.shape[0]
        if m != self.size or self.row_potentials is None or self.col_potentials is None:
            return False
        tol = 1e-9 * m * max(float(np.abs(a).max()), 1.0)
        u, v = self.row_potentials, self.col_potentials
        slack = a - u[:, None] - v[None, :]
        if self.sense == "max":
            slack = -slack
        rows = np.arange(m)
        return bool(
            self.dual_gap() <= tol
            and slack.min() >= -tol
            and np.abs(slack[rows, np.asarray(self.sigma)]).max() <= tol
        )

    def to_record(self) -> AssignmentRecord:
        return AssignmentRecord(
            sense=self.sense,
            sigma=list(self.sigma),
            value=self.value,
            row_potentials=None if self.row_potentials is None else self.row_potentials.tolist(),
            col_potentials=None if self.col_potentials is None else self.col_potentials.tolist(),
        )


def _as_cost_matrix(cost) -> np.ndarray:
    a = np.asarray(cost, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidMatrixError(f"cost matrix must be square, got shape {a.shape}")
    if a.shape[0] == 0:
        raise InvalidMatrixError("cost matrix is empty")
    if a.shape[0] > MAX_SIZE:
        raise InvalidMatrixError(f"cost matrix size {a.shape[0]} exceeds {MAX_SIZE}")
    if not np.isfinite(a).all():
        i, j = np.argwhere(~np.isfinite(a))[0]
        raise InvalidMatrixError(f"non-finite entry at ({i}, {j})")
    return a


def _objective(a: np.ndarray, sigma) -> float:
    # Row-order summation; shared by every solver so equal permutations give equal values.
    total = 0.0
    for i, j in enumerate(sigma):
        total += float(a[i, j])
    return total


def _hungarian_min(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Shortest augmenting path Hungarian method for the min sense.

    Returns (sigma, u, v) with u_i + v_j <= a_ij and equality on sigma.
    Internally rows and columns are 1-based; slot 0 is the virtual column.
    """
    m = a.shape[0]
    u = np.zeros(m + 1)
    v = np.zeros(m + 1)
    p = np.zeros(m + 1, dtype=np.int64)  # p[j]: row matched to column j
    way = np.zeros(m + 1, dtype=np.int64)

    for i in range(1, m + 1):
        p[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            reduced = a[i0 - 1] - u[i0] - v[1:]
            better = free & (reduced < minv[1:])
            minv[1:][better] = reduced[better]
            way[1:][better] = j0
            candidates = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(candidates)) + 1
            delta = candidates[j1 - 1]
            u[p[used]] += delta
            v[used] -= delta
            minv[1:][free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    sigma = np.empty(m, dtype=np.int64)
    sigma[p[1:] - 1] = np.arange(m)
    return sigma, u[1:], v[1:]


def _lexicographic_tight_matching(a: np.ndarray, u: np.ndarray, v: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """
    Lexicographically smallest perfect matching in the tight-edge subgraph.

    Rows are fixed in increasing order to their smallest tight column that
    still admits a perfect matching of the remaining rows, found by an
    alternating path back to the row's current column.
    """
    m = a.shape[0]
    tol = get_settings().LAP_TIGHT_RTOL * float(np.abs(a).max())
    neighbors: Dict[int, np.ndarray] = {}

    def tight(row: int) -> np.ndarray:
        if row not in neighbors:
            neighbors[row] = np.flatnonzero(a[row] - u[row] - v <= tol)
        return neighbors[row]

    row_of = np.empty(m, dtype=np.int64)
    row_of[sigma] = np.arange(m)
    col_of = sigma.copy()
    fixed_col = np.zeros(m, dtype=bool)

    for i in range(m):
        current = int(col_of[i])
        for j in tight(i):
            j = int(j)
            if j >= current:
                break
            if fixed_col[j]:
                continue
            path = _alternating_path(int(row_of[j]), j, current, tight, row_of, col_of, fixed_col)
            if path is None:
                continue
            col_of[i], row_of[j] = j, i
            for row, col in path:
                col_of[row], row_of[col] = col, row
            break
        fixed_col[col_of[i]] = True
    return col_of


def _alternating_path(start_row, taken, target, tight, row_of, col_of, fixed_col):
    """BFS from start_row over tight edges to the freed column `target`; returns (row, col) pairs."""
    parent = {}
    seen_rows = {start_row}
    queue = [start_row]
    head = 0
    while head < len(queue):
        row = queue[head]
        head += 1
        for col in tight(row):
            col = int(col)
            if col == taken or fixed_col[col] or col in parent:
                continue
            parent[col] = row
            if col == target:
                path = []
                while True:
                    r = parent[col]
                    path.append((r, col))
                    if r == start_row:
                        return path
                    col = int(col_of[r])
            nxt = int(row_of[col])
            if nxt not in seen_rows:
                seen_rows.add(nxt)
                queue.append(nxt)
    return None


def solve_lap(cost, sense: Sense = "min") -> Assignment:
    """
    Solve the square linear assignment problem exactly.

    Args:
        cost: m x m real matrix with finite entries, 1 <= m <= 2^14
        sense: "min" or "max"

    Returns:
        Assignment with 0-based sigma (sigma[i] is the column of row i), the
        objective value and potentials proving optimality
    """
    a = _as_cost_matrix(cost)
    work = -a if sense == "max" else a
    sigma, u, v = _hungarian_min(work)
    sigma = _lexicographic_tight_matching(work, u, v, sigma)
    if sense == "max":
        u, v = -u, -v
    value = _objective(a, sigma)
    logger.debug(f"LAP m={a.shape[0]} sense={sense} value={value:.12g}")
    return Assignment(
        sigma=tuple(int(j) for j in sigma),
        value=value,
        sense=sense,
        row_potentials=u,
        col_potentials=v,
    )


def brute_force_lap(cost, sense: Sense = "min") -> Assignment:
    """Exhaustive search over all m! permutations (m <= 10), lexicographic tie-break."""
    a = _as_cost_matrix(cost)
    m = a.shape[0]
    if m > BRUTE_FORCE_MAX_SIZE:
        raise InvalidMatrixError(f"brute force supports m <= {BRUTE_FORCE_MAX_SIZE}, got {m}")

    rows = np.arange(m)
    totals = []
    perms = itertools.permutations(range(m))
    while True:
        chunk = np.array(list(itertools.islice(perms, 50000)), dtype=np.int64)
        if chunk.size == 0:
            break
        totals.append(a[rows, chunk].sum(axis=1))
    totals = np.concatenate(totals)

    tol = 1e-10 * max(float(np.abs(a).max()), 1.0) * m
    if sense == "max":
        index = int(np.flatnonzero(totals >= totals.max() - tol)[0])
    else:
        index = int(np.flatnonzero(totals <= totals.min() + tol)[0])
    sigma = next(itertools.islice(itertools.permutations(range(m)), index, None))
    return Assignment(sigma=tuple(sigma), value=_objective(a, sigma), sense=sense)
