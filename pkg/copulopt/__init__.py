"""
copulopt: extremal integrals of cost functions over copulas.
"""
from .core.analytic import PhiSpec, certify_uckelmann, solve_monotone, solve_uckelmann
from .core.copula import (
    EmpiricalCopula,
    empirical_copula,
    eval_frechet_lower,
    eval_frechet_upper,
    eval_shuffle,
    integrate_against_shuffle,
    shuffle_from_coupling,
    validate_copula,
)
from .core.costfn import CostFunction, parse_cost, parse_phi
from .core.grid import DiscreteCoupling, GridCostMatrix, bound, bound_sequence, build_matrix, support_points
from .core.lap import Assignment, brute_force_lap, solve_lap
from .core.verify import SupportSet, check_cyclical_monotonicity, check_doubly_stochastic
from .schemas import GridSpec, ShuffleOfM
from .services.registry import registry_cost, registry_phi

__all__ = [
    "Assignment",
    "CostFunction",
    "DiscreteCoupling",
    "EmpiricalCopula",
    "GridCostMatrix",
    "GridSpec",
    "PhiSpec",
    "ShuffleOfM",
    "SupportSet",
    "bound",
    "bound_sequence",
    "brute_force_lap",
    "build_matrix",
    "certify_uckelmann",
    "check_cyclical_monotonicity",
    "check_doubly_stochastic",
    "empirical_copula",
    "eval_frechet_lower",
    "eval_frechet_upper",
    "eval_shuffle",
    "integrate_against_shuffle",
    "parse_cost",
    "parse_phi",
    "registry_cost",
    "registry_phi",
    "shuffle_from_coupling",
    "solve_lap",
    "solve_monotone",
    "solve_uckelmann",
    "support_points",
    "validate_copula",
]
