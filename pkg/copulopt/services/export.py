"""
CSV and JSON serialization of solver outputs.

CSV files have a header row and write floats with 17 significant digits.
JSON records come from the pydantic schemas with "schema" as first key.
"""
import csv
import io
import json
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, TextIO, Union

import numpy as np
from pydantic import ValidationError

from ..core.copula import EmpiricalCopula
from ..core.grid import DiscreteCoupling, GridCostMatrix
from ..errors import DomainError, InvalidMatrixError
from ..schemas import CouplingRecord

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def format_float(value: float) -> str:
    return "%.17g" % value


def _cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    return str(value)


def write_csv(stream: TextIO, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buffer = io.StringIO()
    write_csv(buffer, header, rows)
    return buffer.getvalue()


def write_text(path: Optional[PathLike], text: str) -> Optional[str]:
    """Write text to path, or return it when path is None."""
    if path is None:
        return text
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.info(f"Wrote {path}")
    return None


# ============================================================================
# Writers
# ============================================================================

def grid_matrix_csv(*matrices: GridCostMatrix) -> str:
    """Long format n,mode,i,j,value, one matrix after another, each in row-major order."""
    rows = (
        (matrix.n, matrix.mode, i, j, float(matrix.values[i, j]))
        for matrix in matrices
        for i in range(matrix.size)
        for j in range(matrix.size)
    )
    return csv_text(["n", "mode", "i", "j", "value"], rows)


def points_csv(points) -> str:
    return csv_text(["x", "y"], ((float(x), float(y)) for x, y in np.asarray(points).reshape(-1, 2)))


def empirical_copula_csv(copula: EmpiricalCopula) -> str:
    r = copula.resolution
    grid = copula.lattice()
    rows = ((a / r, b / r, float(grid[a, b])) for a in range(r + 1) for b in range(r + 1))
    return csv_text(["x", "y", "C"], rows)


def sequence_csv(start: int, values) -> str:
    return csv_text(["n", "value"], ((start + k, float(v)) for k, v in enumerate(values)))


def bounds_csv(columns: Sequence[str], table: List[Sequence]) -> str:
    return csv_text(["n", *columns], table)


# ============================================================================
# Readers
# ============================================================================

def _read_rows(path: PathLike) -> List[List[str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return [row for row in csv.reader(f) if row and any(cell.strip() for cell in row)]


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_matrix_csv(path: PathLike) -> np.ndarray:
    """Square matrix from a plain numeric CSV; a non-numeric first row is treated as header."""
    rows = _read_rows(path)
    if rows and not all(_is_number(cell) for cell in rows[0]):
        rows = rows[1:]
    if not rows:
        raise InvalidMatrixError(f"{path} holds no matrix rows")
    try:
        values = np.array([[float(cell) for cell in row] for row in rows])
    except ValueError as exc:
        raise InvalidMatrixError(f"{path}: {exc}") from exc
    return values


def read_points_csv(path: PathLike) -> np.ndarray:
    """Support points from an x,y CSV."""
    rows = _read_rows(path)
    if rows and not all(_is_number(cell) for cell in rows[0]):
        rows = rows[1:]
    try:
        points = np.array([[float(row[0]), float(row[1])] for row in rows])
    except (ValueError, IndexError) as exc:
        raise DomainError(f"{path}: expected x,y rows ({exc})") from exc
    if len(points) == 0:
        raise DomainError(f"{path} holds no support points")
    return points


def read_coupling_json(path: PathLike) -> DiscreteCoupling:
    try:
        with open(path, encoding="utf-8") as f:
            record = CouplingRecord.model_validate(json.load(f))
    except (ValueError, ValidationError) as exc:
        raise DomainError(f"{path} is not a coupling record: {exc}") from exc
    return DiscreteCoupling.from_record(record)
