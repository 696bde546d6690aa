"""
Built-in cost functions on the unit square.
"""
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..core.analytic import PhiSpec
from ..core.costfn import CostFunction, parse_expression
from ..errors import UnknownCostError


@dataclass(frozen=True)
class CostEntry:
    expression: str
    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    positive_cross_derivative: bool = False
    singular_axes: Tuple[str, ...] = ()
    # c(x, y) = phi(x + y): (phi, dphi, inflection)
    phi: Optional[Tuple[Callable, Callable, float]] = None


COST_REGISTRY: Dict[str, CostEntry] = {
    "sin_sum": CostEntry(
        expression="sin(pi*(x+y))",
        evaluator=lambda x, y: np.sin(np.pi * (x + y)),
        phi=(
            lambda z: np.sin(np.pi * np.asarray(z, dtype=float)),
            lambda z: np.pi * np.cos(np.pi * np.asarray(z, dtype=float)),
            1.0,
        ),
    ),
    "sinsin": CostEntry(
        expression="sin(pi*x)*sin(pi*y)",
        evaluator=lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y),
    ),
    "sincos": CostEntry(
        expression="sin(pi*x)*cos(pi*y)",
        evaluator=lambda x, y: np.sin(np.pi * x) * np.cos(np.pi * y),
    ),
    "sin_recip_cos": CostEntry(
        expression="sin(pi/x)*cos(pi*y)",
        evaluator=lambda x, y: np.sin(np.pi / x) * np.cos(np.pi * y),
        singular_axes=("x",),
    ),
    "product": CostEntry(
        expression="x*y",
        evaluator=lambda x, y: x * y,
        positive_cross_derivative=True,
    ),
    "abs_diff": CostEntry(
        expression="abs(x-y)",
        evaluator=lambda x, y: np.abs(x - y),
    ),
}


def registry_names() -> List[str]:
    return sorted(COST_REGISTRY)


def _entry(name: str) -> CostEntry:
    try:
        return COST_REGISTRY[name]
    except KeyError:
        raise UnknownCostError(
            f"unknown cost {name!r}; choose one of {', '.join(registry_names())}"
        ) from None


def registry_cost(name: str) -> CostFunction:
    """
    Look up a built-in cost.

    Args:
        name: Registry identifier, e.g. "sincos"

    Returns:
        CostFunction with the entry's metadata flags and singular lines

    Example:
        >>> registry_cost("product")(1.0, 1.0)
        1.0
    """
    entry = _entry(name)
    return CostFunction(
        source=name,
        evaluator=entry.evaluator,
        claims_positive_cross_derivative=entry.positive_cross_derivative,
        claims_separable_phi=entry.phi is not None,
        singular_axes=entry.singular_axes,
        expression=parse_expression(entry.expression),
    )


def registry_phi(name: str) -> PhiSpec:
    """PhiSpec of a registry cost of the form c(x, y) = phi(x + y)."""
    entry = _entry(name)
    if entry.phi is None:
        raise UnknownCostError(f"cost {name!r} is not of the form phi(x + y)")
    phi, dphi, inflection = entry.phi
    return PhiSpec(phi=phi, dphi=dphi, inflection=inflection, source=name)
