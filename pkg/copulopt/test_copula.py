import numpy as np
import pytest

from copulopt.core.copula import (
    empirical_copula,
    eval_frechet_lower,
    eval_frechet_upper,
    eval_shuffle,
    integrate_against_copula,
    integrate_against_shuffle,
    measure_preservation,
    shuffle_from_coupling,
    support_map,
    validate_copula,
)
from copulopt.core.costfn import parse_cost
from copulopt.core.grid import bound
from copulopt.errors import DomainError
from copulopt.schemas import GridSpec, ShuffleOfM, UckelmannSolution
from copulopt.services.registry import registry_cost
from copulopt.services.sequences import consecutive_pairs, vdc_sequence


def random_shuffle(rng) -> ShuffleOfM:
    n = int(rng.integers(1, 7))
    inner = np.sort(rng.uniform(0.05, 0.95, size=n - 1)).tolist()
    return ShuffleOfM(
        n=n,
        s=[0.0, *inner, 1.0],
        pi=(rng.permutation(n) + 1).tolist(),
        omega=rng.choice([-1, 1], size=n).tolist(),
    )


@pytest.fixture
def shuffles():
    rng = np.random.default_rng(99)
    return [random_shuffle(rng) for _ in range(20)]


# --- Frechet Bounds ---

def test_frechet_bounds():
    assert eval_frechet_upper(0.3, 0.8) == 0.3
    assert eval_frechet_lower(0.3, 0.8) == pytest.approx(0.1)
    assert eval_frechet_lower(0.3, 0.4) == 0.0


def test_frechet_domain():
    with pytest.raises(DomainError):
        eval_frechet_upper(1.5, 0.2)
    with pytest.raises(DomainError):
        eval_frechet_lower(0.5, -0.1)


# --- Shuffles ---

def test_shuffle_parameters_are_validated():
    with pytest.raises(ValueError):
        ShuffleOfM(n=2, s=[0.0, 0.5], pi=[1, 2], omega=[1, 1])
    with pytest.raises(ValueError):
        ShuffleOfM(n=2, s=[0.0, 0.6, 0.6], pi=[1, 2], omega=[1, 1])
    with pytest.raises(ValueError):
        ShuffleOfM(n=2, s=[0.0, 0.5, 1.0], pi=[1, 1], omega=[1, 1])
    with pytest.raises(ValueError):
        ShuffleOfM(n=2, s=[0.0, 0.5, 1.0], pi=[2, 1], omega=[1, 0])


def test_t_partition_makes_square_blocks():
    S = ShuffleOfM(n=3, s=[0.0, 0.2, 0.5, 1.0], pi=[3, 1, 2], omega=[1, -1, 1])
    np.testing.assert_allclose(S.t_partition(), [0.0, 0.3, 0.8, 1.0])
    for x0, x1, y0, y1, _ in S.blocks():
        assert x1 - x0 == pytest.approx(y1 - y0)


def test_trivial_shuffle_is_upper_bound():
    t = np.linspace(0.0, 1.0, 33)
    X, Y = np.meshgrid(t, t)
    np.testing.assert_allclose(eval_shuffle(ShuffleOfM.upper(), X, Y), eval_frechet_upper(X, Y), atol=1e-15)
    np.testing.assert_allclose(eval_shuffle(ShuffleOfM.lower(), X, Y), eval_frechet_lower(X, Y), atol=1e-15)


def test_antidiagonal_trivial_shuffle_value():
    assert eval_shuffle(ShuffleOfM.lower(), 0.3, 0.8) == pytest.approx(0.1)


def test_swapped_halves_have_no_mass_in_lower_left():
    S = ShuffleOfM(n=2, s=[0.0, 0.5, 1.0], pi=[2, 1], omega=[1, 1])
    assert eval_shuffle(S, 0.5, 0.5) == 0.0
    assert eval_shuffle(S, 0.5, 1.0) == pytest.approx(0.5)


def test_every_shuffle_is_a_copula(shuffles):
    for S in shuffles:
        report = validate_copula(lambda x, y: eval_shuffle(S, x, y), grid=64, tol=1e-12)
        assert report.passed, report


def test_shuffle_record_round_trip():
    _, coupling = bound(registry_cost("sincos"), GridSpec(n=3))
    S = shuffle_from_coupling(coupling)
    text = S.to_json()
    assert text.startswith('{\n  "schema": 1')
    restored = ShuffleOfM.model_validate_json(text)
    assert restored == S
    assert restored.pi == [j + 1 for j in coupling.sigma]


def test_support_map_of_swap():
    S = ShuffleOfM(n=2, s=[0.0, 0.5, 1.0], pi=[2, 1], omega=[1, -1])
    gamma = support_map(S)
    assert gamma(0.25) == pytest.approx(0.75)
    assert gamma(0.75) == pytest.approx(0.25)
    assert support_map(ShuffleOfM.lower())(0.2) == pytest.approx(0.8)


def test_support_maps_preserve_measure(shuffles):
    for S in shuffles[:5]:
        assert measure_preservation(support_map(S), samples=100_000, seed=3) < 3 / np.sqrt(100_000)
    solution = UckelmannSolution(beta=0.7541996008265638, value=0.3713, branch="shuffle")
    assert measure_preservation(solution.support_map, samples=100_000, seed=4) < 3 / np.sqrt(100_000)


# --- Integration ---

def test_integrals_against_frechet_bounds():
    c = registry_cost("product")
    assert integrate_against_shuffle(c, ShuffleOfM.upper()) == pytest.approx(1 / 3, abs=1e-10)
    assert integrate_against_shuffle(c, ShuffleOfM.lower()) == pytest.approx(1 / 6, abs=1e-10)
    assert integrate_against_copula(c, "upper") == pytest.approx(1 / 3, abs=1e-10)
    with pytest.raises(DomainError):
        integrate_against_copula(c, "independence")


def test_linear_cost_integrates_to_one(shuffles):
    c = parse_cost("x+y")
    for S in shuffles:
        assert integrate_against_shuffle(c, S) == pytest.approx(1.0, abs=1e-10)


def test_integration_is_linear(shuffles):
    c1, c2 = registry_cost("product"), registry_cost("sincos")
    combined = parse_cost("2*x*y - 3*sin(pi*x)*cos(pi*y)")
    for S in shuffles:
        expected = 2 * integrate_against_shuffle(c1, S) - 3 * integrate_against_shuffle(c2, S)
        assert integrate_against_shuffle(combined, S) == pytest.approx(expected, abs=1e-12)


def test_quad_nodes_lower_limit():
    with pytest.raises(DomainError):
        integrate_against_shuffle(registry_cost("product"), ShuffleOfM.upper(), quad_nodes=1)


@pytest.mark.parametrize("name", ["sin_sum", "sinsin", "sincos", "product", "abs_diff"])
def test_shuffle_matches_grid_value(name):
    c = registry_cost(name)
    value, coupling = bound(c, GridSpec(n=6), "max")
    S = shuffle_from_coupling(coupling)
    assert S.n == 64 and all(w == 1 for w in S.omega)
    assert integrate_against_shuffle(c, S, quad_nodes=8) == pytest.approx(value, abs=1e-2)


# --- Axiom Checks ---

@pytest.mark.parametrize("grid", [2, 17, 64])
def test_upper_bound_passes(grid):
    assert validate_copula(eval_frechet_upper, grid).passed


def test_independence_passes():
    assert validate_copula(lambda x, y: x * y, 32).passed


def test_bad_margin_fails():
    report = validate_copula(lambda x, y: x * y ** 2, 16)
    assert not report.passed
    assert report.check == "margin"
    assert report.point[0] == 1.0


def test_non_increasing_function_fails():
    report = validate_copula(lambda x, y: np.minimum(x, y) - 0.05 * np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y), 32)
    assert not report.passed
    assert report.check in ("two_increasing", "frechet")


# --- Empirical Copulas ---

def test_empirical_copula_single_point():
    emp = empirical_copula([(0.0, 0.0)] * 5, r=2)
    assert emp(0.5, 0.5) == 1.0
    assert emp(0.0, 0.0) == 0.0


def test_consecutive_base_two_pairs_avoid_lower_left():
    emp = empirical_copula(consecutive_pairs(2, 1000), r=2)
    assert emp(0.5, 0.5) <= 2 / 1000


def test_diagonal_pairs_approximate_upper_bound():
    v = vdc_sequence(2, 10_000)
    emp = empirical_copula(np.column_stack([v, v]), r=8)
    t = np.arange(9) / 8
    np.testing.assert_allclose(emp.lattice(), np.minimum.outer(t, t), atol=0.05)


def test_empirical_margins_are_uniform():
    emp = empirical_copula(consecutive_pairs(3, 10_000), r=8)
    assert emp.margin_deviation() <= 0.02
    assert emp.margin_deviation() <= 2 / 8 + 10 / 10_000


def test_out_of_range_point_is_reported():
    with pytest.raises(DomainError, match="point 2"):
        empirical_copula([(0.1, 0.2), (0.3, 0.4), (1.0, 0.5)], r=4)
