import math

import numpy as np
import pytest

from copulopt.core.costfn import (
    BinOp,
    Call,
    Const,
    CostFunction,
    Neg,
    Pow,
    Var,
    parse_cost,
    parse_expression,
    parse_phi,
    singular_variables,
    to_text,
)
from copulopt.errors import CostExpressionError, UnknownCostError
from copulopt.services.registry import COST_REGISTRY, registry_cost, registry_names, registry_phi


# --- Parser Tests ---

@pytest.mark.parametrize("expr, x, y, expected", [
    ("sin(pi*x)*cos(pi*y)", 0.5, 0.0, 1.0),
    ("x*y", 0.25, 0.5, 0.125),
    ("x^2 + y**3", 0.5, 0.5, 0.375),
    ("-x - -y", 0.25, 0.75, 0.5),
    ("abs(x - y) / 2", 0.2, 0.7, 0.25),
    ("exp(0)*2e-1", 0.3, 0.3, 0.2),
])
def test_parse_cost_evaluates(expr, x, y, expected):
    assert parse_cost(expr)(x, y) == pytest.approx(expected, abs=1e-15)


def test_precedence_and_associativity():
    tree = parse_expression("1 - 2 - 3 * x / y")
    assert tree == BinOp("-", BinOp("-", Const(1.0), Const(2.0)), BinOp("/", BinOp("*", Const(3.0), Var("x")), Var("y")))
    assert parse_expression("-x^2") == Neg(Pow(Var("x"), 2))


def test_unbalanced_parenthesis_reports_offset():
    with pytest.raises(CostExpressionError) as excinfo:
        parse_cost("sin(pi*(x+")
    assert excinfo.value.position == 10
    assert "offset 10" in str(excinfo.value)


@pytest.mark.parametrize("expr, position", [
    ("x + q", 4),
    ("tan(x)", 0),
    ("sin(x, y)", 0),
    ("x ^ y", 4),
    ("x $ y", 2),
    ("", 0),
    ("x y", 2),
])
def test_parse_errors(expr, position):
    with pytest.raises(CostExpressionError) as excinfo:
        parse_cost(expr)
    assert excinfo.value.position == position


def test_overflowing_literal_is_rejected():
    with pytest.raises(CostExpressionError) as excinfo:
        parse_cost("x+1e999*y")
    assert excinfo.value.position == 2
    assert "overflows" in str(excinfo.value)


def test_error_is_value_error():
    with pytest.raises(ValueError):
        parse_cost("sin")


@pytest.mark.parametrize("expr", [
    "sin(pi*(x+y))",
    "sin(pi/x)*cos(pi*y)",
    "-(x - 0.5)^2 + abs(y)",
    "exp(-x*y) / (1 + x^3)",
    "2.5e-3 * x - -y",
])
def test_pretty_print_round_trip(expr):
    tree = parse_expression(expr)
    assert parse_expression(to_text(tree)) == tree


def test_singular_lines_from_monomial_divisors():
    assert singular_variables(parse_expression("sin(pi/x)*cos(pi*y)")) == ("x",)
    assert singular_variables(parse_expression("1/(2*x*y^2)")) == ("x", "y")
    assert singular_variables(parse_expression("1/(x+1)")) == ()
    assert parse_cost("sin(pi/x)").singular_points == ("x=0",)


def test_singular_axis_is_clamped():
    c = parse_cost("1/x")
    assert c(0.0, 0.3) == pytest.approx(1e12)
    assert np.isfinite(c(np.zeros(3), np.ones(3))).all()


def test_broadcasting_and_scalars():
    c = parse_cost("x + 2*y")
    out = c(np.array([[0.0], [1.0]]), np.array([0.0, 0.5, 1.0]))
    assert out.shape == (2, 3)
    np.testing.assert_allclose(out[1], [1.0, 2.0, 3.0])
    assert isinstance(c(0.1, 0.2), float)
    assert parse_cost("pi")(np.zeros(4), 0.5).shape == (4,)


def test_parse_phi_uses_z():
    phi = parse_phi("sin(pi*z)")
    assert phi(0.5) == pytest.approx(1.0)
    np.testing.assert_allclose(phi(np.array([0.0, 1.0])), [0.0, 0.0], atol=1e-15)
    with pytest.raises(CostExpressionError):
        parse_phi("sin(pi*x)")


def test_piecewise_constant_cost():
    c = CostFunction.piecewise_constant(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert c(0.1, 0.1) == 1.0
    assert c(0.6, 0.2) == 3.0
    assert c(1.0, 1.0) == 4.0
    assert c(0.5, 0.5) == 4.0


# --- Registry Tests ---

@pytest.mark.parametrize("name, x, y, expected", [
    ("product", 1.0, 1.0, 1.0),
    ("sin_sum", 0.5, 0.5, 0.0),
    ("abs_diff", 0.2, 0.7, 0.5),
    ("sinsin", 0.5, 0.5, 1.0),
    ("sincos", 0.5, 0.0, 1.0),
])
def test_registry_values(name, x, y, expected):
    assert registry_cost(name)(x, y) == pytest.approx(expected, abs=1e-15)


def test_registry_metadata():
    assert registry_cost("product").claims_positive_cross_derivative
    assert not registry_cost("sincos").claims_positive_cross_derivative
    assert registry_cost("sin_recip_cos").singular_points == ("x=0",)
    assert registry_cost("sin_sum").claims_separable_phi
    assert set(registry_names()) == {"sin_sum", "sinsin", "sincos", "sin_recip_cos", "product", "abs_diff"}


def test_unknown_registry_name():
    with pytest.raises(UnknownCostError):
        registry_cost("cosine")
    with pytest.raises(UnknownCostError):
        registry_phi("product")


@pytest.mark.parametrize("name", sorted(COST_REGISTRY))
def test_registry_matches_parsed_expression(name):
    rng = np.random.default_rng(7)
    x, y = rng.random(1000), rng.random(1000)
    registry = registry_cost(name)
    parsed = parse_cost(COST_REGISTRY[name].expression)
    np.testing.assert_allclose(parsed(x, y), registry(x, y), rtol=0, atol=1e-14)


@pytest.mark.parametrize("name", sorted(COST_REGISTRY))
def test_evaluation_is_pure(name):
    rng = np.random.default_rng(11)
    x, y = rng.random(200), rng.random(200)
    c = registry_cost(name)
    assert np.array_equal(c(x, y), c(x, y))


def test_registry_phi_derivative_matches_differences():
    spec = registry_phi("sin_sum")
    z = np.linspace(0.0, 2.0, 1024)
    h = 1e-6
    numeric = (spec.phi(z + h) - spec.phi(z - h)) / (2 * h)
    np.testing.assert_allclose(spec.dphi(z), numeric, atol=1e-6)
    assert spec.inflection == 1.0
    assert spec.phi(0.5) == pytest.approx(math.sin(math.pi / 2))
