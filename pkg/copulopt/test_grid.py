import numpy as np
import pytest

from copulopt.core.costfn import parse_cost
from copulopt.core.grid import (
    DiscreteCoupling,
    bound,
    bound_sequence,
    build_matrix,
    sample_offsets,
    support_points,
)
from copulopt.core.lap import brute_force_lap
from copulopt.core.verify import check_doubly_stochastic
from copulopt.errors import DomainError, NumericError
from copulopt.schemas import GridSpec
from copulopt.services.registry import registry_cost, registry_names

TABLE_SINCOS = [0.1768, 0.2039, 0.2102, 0.2117, 0.2121, 0.2122]
TABLE_SIN_RECIP_COS = [0.4612, 0.3402, 0.5067, 0.4012, 0.4580, 0.4400]
SMOOTH_COSTS = ["sin_sum", "sinsin", "sincos", "product", "abs_diff"]


# --- Matrix Assembly ---

def test_product_midpoint_matrix():
    matrix = build_matrix(registry_cost("product"), GridSpec(n=1, mode="midpoint"))
    np.testing.assert_allclose(matrix.values, [[0.0625, 0.1875], [0.1875, 0.5625]], atol=1e-15)


@pytest.mark.parametrize("subsamples", [2, 3, 9])
def test_product_upper_matrix_uses_corner(subsamples):
    matrix = build_matrix(registry_cost("product"), GridSpec(n=1, mode="upper", subsamples=subsamples))
    np.testing.assert_allclose(matrix.values, [[0.25, 0.5], [0.5, 1.0]], atol=1e-15)


def test_product_lower_matrix_uses_corner():
    matrix = build_matrix(registry_cost("product"), GridSpec(n=1, mode="lower", subsamples=2))
    np.testing.assert_allclose(matrix.values, [[0.0, 0.0], [0.0, 0.25]], atol=1e-15)


def test_sinsin_midpoint_is_outer_product():
    u = np.sin(np.pi * np.array([1, 3, 5, 7]) / 8)
    matrix = build_matrix(registry_cost("sinsin"), GridSpec(n=2, mode="midpoint"))
    np.testing.assert_allclose(matrix.values, np.outer(u, u), atol=1e-15)
    np.testing.assert_array_equal(matrix.values, matrix.values.T)


def test_sample_offsets_include_corners_and_center():
    np.testing.assert_array_equal(sample_offsets(1), [0.5])
    np.testing.assert_array_equal(sample_offsets(2), [0.0, 1.0])
    assert list(sample_offsets(4)) == pytest.approx([0.0, 1 / 3, 0.5, 2 / 3, 1.0])
    assert 0.5 in sample_offsets(9)


def test_singular_samples_are_excluded():
    c = registry_cost("sin_recip_cos")
    spec = GridSpec(n=2, mode="upper", subsamples=3)
    matrix = build_matrix(c, spec)
    assert np.isfinite(matrix.values).all()
    clamped = build_matrix(c, GridSpec(n=2, mode="upper", subsamples=3, singular_policy="clamp"))
    assert (clamped.values >= matrix.values).all()


def test_non_finite_cell_reports_index():
    with pytest.raises(NumericError, match=r"cell \(0, 0\)"):
        build_matrix(parse_cost("1/(x-0.5)"), GridSpec(n=1, mode="upper", subsamples=3))


def test_as_cost_is_step_function():
    matrix = build_matrix(registry_cost("product"), GridSpec(n=1))
    step = matrix.as_cost()
    assert step(0.1, 0.9) == matrix.values[0, 1]
    assert step(0.9, 0.9) == matrix.values[1, 1]


# --- Bounds ---

def test_product_bound_level_one():
    value, coupling = bound(registry_cost("product"), GridSpec(n=1), "max")
    assert value == pytest.approx(0.3125, abs=1e-15)
    assert coupling.sigma == (0, 1)


@pytest.mark.parametrize("n", range(2, 8))
def test_sinsin_midpoint_bound_is_one_half(n):
    value, _ = bound(registry_cost("sinsin"), GridSpec(n=n), "max")
    assert value == pytest.approx(0.5, abs=1e-9)


def test_sincos_table_column():
    values = [v for _, v in bound_sequence(registry_cost("sincos"), 7, "midpoint", "max", n_min=2)]
    assert values == pytest.approx(TABLE_SINCOS, abs=1e-3)


def test_sin_recip_cos_table_column():
    values = [v for _, v in bound_sequence(registry_cost("sin_recip_cos"), 7, "midpoint", "max", n_min=2)]
    assert values == pytest.approx(TABLE_SIN_RECIP_COS, abs=2e-2)


def test_product_upper_sequence_decreases_toward_one_third():
    values = [v for _, v in bound_sequence(registry_cost("product"), 4, "upper", "max", subsamples=2)]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    assert values[-1] > 1 / 3
    assert values[-1] - 1 / 3 < values[0] - 1 / 3


@pytest.mark.parametrize("name", ["product", "sincos"])
def test_refinement_monotonicity_with_corner_samples(name):
    c = registry_cost(name)
    upper = [v for _, v in bound_sequence(c, 6, "upper", "max", subsamples=2)]
    lower = [v for _, v in bound_sequence(c, 6, "lower", "max", subsamples=2)]
    assert all(b <= a + 1e-12 for a, b in zip(upper, upper[1:]))
    assert all(b >= a - 1e-12 for a, b in zip(lower, lower[1:]))


@pytest.mark.parametrize("name", registry_names())
def test_lower_midpoint_upper_sandwich(name):
    c = registry_cost(name)
    for n in range(3, 8):
        lower, _ = bound(c, GridSpec(n=n, mode="lower"), "max")
        mid, _ = bound(c, GridSpec(n=n, mode="midpoint"), "max")
        upper, _ = bound(c, GridSpec(n=n, mode="upper"), "max")
        assert lower <= mid + 1e-9
        assert mid <= upper + 1e-9


@pytest.mark.parametrize("name", SMOOTH_COSTS)
def test_gap_shrinks_with_refinement(name):
    c = registry_cost(name)

    def gap(n):
        return bound(c, GridSpec(n=n, mode="upper"), "max")[0] - bound(c, GridSpec(n=n, mode="lower"), "max")[0]

    assert gap(7) < gap(3)


@pytest.mark.parametrize("sense", ["min", "max"])
def test_linear_cost_integrates_to_one(sense):
    c = parse_cost("x + y")
    for n in range(1, 6):
        value, _ = bound(c, GridSpec(n=n), sense)
        assert value == pytest.approx(1.0, abs=1e-12)


def test_bound_sequence_level_limits():
    with pytest.raises(DomainError):
        bound_sequence(registry_cost("product"), 11)
    with pytest.raises(DomainError):
        bound_sequence(registry_cost("product"), 3, n_min=4)


def test_bound_respects_max_level():
    with pytest.raises(DomainError):
        bound(registry_cost("product"), GridSpec(n=11))


# --- Couplings ---

def test_support_points():
    np.testing.assert_allclose(support_points(DiscreteCoupling(n=1, sigma=(0, 1))), [[0.25, 0.25], [0.75, 0.75]])
    np.testing.assert_allclose(support_points(DiscreteCoupling(n=1, sigma=(1, 0))), [[0.25, 0.75], [0.75, 0.25]])


def test_product_level_three_support_is_diagonal():
    c = registry_cost("product")
    _, coupling = bound(c, GridSpec(n=3), "max")
    centers = (np.arange(8) + 0.5) / 8
    np.testing.assert_allclose(support_points(coupling), np.column_stack([centers, centers]))
    assert brute_force_lap(build_matrix(c, GridSpec(n=3)).values, "max").sigma == coupling.sigma


@pytest.mark.parametrize("name", registry_names())
def test_couplings_are_doubly_stochastic(name):
    for n in (1, 3, 5):
        _, coupling = bound(registry_cost(name), GridSpec(n=n), "max")
        matrix = coupling.matrix()
        assert check_doubly_stochastic(matrix, tol=0.0).passed
        assert matrix.sum() == 1.0


def test_coupling_record_round_trip():
    coupling = DiscreteCoupling(n=2, sigma=(3, 1, 0, 2), value=0.25)
    assert DiscreteCoupling.from_record(coupling.to_record()) == coupling
    record = coupling.to_record().model_copy(update={"sigma": [0, 0, 1, 2]})
    with pytest.raises(DomainError):
        DiscreteCoupling.from_record(record)
