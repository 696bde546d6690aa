"""
Cost functions on the unit square.

A CostFunction wraps a deterministic, numpy-vectorized evaluator together with
the metadata the solvers rely on. Expressions are parsed by a small recursive
descent parser over the grammar documented in docs/features/cost_expressions.md:

    expr   = term { ("+" | "-") term } ;
    term   = unary { ("*" | "/") unary } ;
    unary  = "-" unary | power ;
    power  = atom [ ("^" | "**") integer ] ;
    atom   = number | variable | "pi" | func "(" expr ")" | "(" expr ")" ;
    func   = "sin" | "cos" | "exp" | "abs" ;
"""
import logging
import re
from dataclasses import dataclass, field
from typing import Callable, FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import get_settings
from ..errors import CostExpressionError

logger = logging.getLogger(__name__)

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "abs": np.abs,
}
BINARY_OPS = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
}


# ============================================================================
# Expression tree
# ============================================================================

@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


Node = Union[Const, Var, Pi, Neg, BinOp, Call, Pow]


def to_text(node: Node) -> str:
    """Fully parenthesized text that re-parses to a structurally equal tree."""
    if isinstance(node, Const):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Pi):
        return "pi"
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Pow):
        return f"({to_text(node.base)}^{node.exponent})"
    raise TypeError(f"not an expression node: {node!r}")


# ============================================================================
# Tokenizer and parser
# ============================================================================

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\*\*|[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # number | name | op | end
    text: str
    position: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise CostExpressionError(f"unexpected character {text[pos]!r}", pos)
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, match.group(), pos))
        pos = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.tokens = tokenize(text)
        self.index = 0
        self.variables = tuple(variables)

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def expect(self, text: str) -> Token:
        token = self.current
        if token.text != text:
            found = "end of expression" if token.kind == "end" else repr(token.text)
            raise CostExpressionError(f"expected {text!r}, found {found}", token.position)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        if self.current.kind != "end":
            raise CostExpressionError(f"unexpected {self.current.text!r}", self.current.position)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.current.text in ("+", "-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.current.text in ("*", "/"):
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.current.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.current.text in ("^", "**"):
            self.advance()
            token = self.current
            if token.kind != "number" or not token.text.isdigit():
                raise CostExpressionError("exponent must be an integer literal", token.position)
            self.advance()
            return Pow(base, int(token.text))
        return base

    def atom(self) -> Node:
        token = self.current
        if token.kind == "number":
            self.advance()
            value = float(token.text)
            if not np.isfinite(value):
                raise CostExpressionError(f"numeric literal {token.text!r} overflows", token.position)
            return Const(value)
        if token.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if token.kind == "name":
            self.advance()
            if token.text in FUNCTIONS:
                return self.call(token)
            if self.current.text == "(":
                if token.text in self.variables or token.text == "pi":
                    raise CostExpressionError(f"{token.text!r} is not a function", token.position)
                raise CostExpressionError(f"unknown function {token.text!r}", token.position)
            if token.text == "pi":
                return Pi()
            if token.text in self.variables:
                return Var(token.text)
            raise CostExpressionError(f"unknown identifier {token.text!r}", token.position)
        if token.kind == "end":
            raise CostExpressionError("unexpected end of expression", token.position)
        raise CostExpressionError(f"unexpected {token.text!r}", token.position)

    def call(self, name: Token) -> Node:
        if self.current.text != "(":
            raise CostExpressionError(f"function {name.text!r} requires parentheses", self.current.position)
        self.advance()
        args = [self.expr()]
        while self.current.text == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        if len(args) != 1:
            raise CostExpressionError(
                f"{name.text} expects 1 argument, got {len(args)}", name.position
            )
        return Call(name.text, args[0])


def parse_expression(text: str, variables: Sequence[str] = ("x", "y")) -> Node:
    if not text or not text.strip():
        raise CostExpressionError("empty expression", 0)
    return _Parser(text, variables).parse()


# ============================================================================
# Analysis and compilation
# ============================================================================

def _monomial_variables(node: Node) -> Optional[FrozenSet[str]]:
    """Variables of a monomial (product of constants and variable powers), else None."""
    if isinstance(node, (Const, Pi)):
        return frozenset()
    if isinstance(node, Var):
        return frozenset([node.name])
    if isinstance(node, Neg):
        return _monomial_variables(node.operand)
    if isinstance(node, Pow):
        inner = _monomial_variables(node.base)
        if inner is None:
            return None
        return inner if node.exponent > 0 else frozenset()
    if isinstance(node, BinOp) and node.op == "*":
        left, right = _monomial_variables(node.left), _monomial_variables(node.right)
        if left is None or right is None:
            return None
        return left | right
    return None


def singular_variables(node: Node) -> Tuple[str, ...]:
    """Variables v such that the line v = 0 zeroes a monomial divisor somewhere in the tree."""
    found = set()

    def visit(n: Node):
        if isinstance(n, BinOp):
            if n.op == "/":
                found.update(_monomial_variables(n.right) or ())
            visit(n.left)
            visit(n.right)
        elif isinstance(n, (Neg,)):
            visit(n.operand)
        elif isinstance(n, Call):
            visit(n.arg)
        elif isinstance(n, Pow):
            visit(n.base)

    visit(node)
    return tuple(sorted(found))


def compile_expression(node: Node, variables: Sequence[str] = ("x", "y")) -> Callable[..., np.ndarray]:
    """Compile a tree to a vectorized callable taking one array per variable."""
    slots = {name: i for i, name in enumerate(variables)}

    def build(n: Node) -> Callable[[Tuple[np.ndarray, ...]], np.ndarray]:
        if isinstance(n, Const):
            value = float(n.value)
            return lambda env: value
        if isinstance(n, Pi):
            return lambda env: np.pi
        if isinstance(n, Var):
            slot = slots[n.name]
            return lambda env: env[slot]
        if isinstance(n, Neg):
            inner = build(n.operand)
            return lambda env: np.negative(inner(env))
        if isinstance(n, BinOp):
            op = BINARY_OPS[n.op]
            left, right = build(n.left), build(n.right)
            return lambda env: op(left(env), right(env))
        if isinstance(n, Call):
            func = FUNCTIONS[n.func]
            inner = build(n.arg)
            return lambda env: func(inner(env))
        if isinstance(n, Pow):
            inner = build(n.base)
            exponent = n.exponent
            return lambda env: np.power(inner(env), exponent)
        raise TypeError(f"not an expression node: {n!r}")

    evaluate = build(node)

    def compiled(*args):
        return evaluate(args)

    return compiled


# ============================================================================
# Cost functions
# ============================================================================

@dataclass(frozen=True)
class CostFunction:
    """
    Deterministic cost c(x, y) on [0, 1]^2.

    Inputs may be scalars or broadcastable arrays. Variables listed in
    `singular_axes` are clamped to at least `clamp_eps` before evaluation so
    the evaluator is total on the closed square.
    """
    source: str
    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray] = field(repr=False, compare=False)
    claims_positive_cross_derivative: bool = False
    claims_separable_phi: bool = False
    singular_axes: Tuple[str, ...] = ()
    clamp_eps: float = field(default_factory=lambda: get_settings().SINGULAR_EPS)
    expression: Optional[Node] = field(default=None, repr=False)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if "x" in self.singular_axes:
            x = np.maximum(x, self.clamp_eps)
        if "y" in self.singular_axes:
            y = np.maximum(y, self.clamp_eps)
        x, y = np.broadcast_arrays(x, y)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = self.evaluator(x, y)
        out = np.array(np.broadcast_to(np.asarray(out, dtype=float), x.shape))
        return float(out) if out.ndim == 0 else out

    @property
    def singular_points(self) -> Tuple[str, ...]:
        """Human-readable singular lines, e.g. ('x=0',)."""
        return tuple(f"{axis}=0" for axis in self.singular_axes)

    @classmethod
    def piecewise_constant(cls, values: np.ndarray, source: str = "piecewise-constant") -> "CostFunction":
        """Step cost taking values[i, j] on the cell [i/m, (i+1)/m) x [j/m, (j+1)/m)."""
        table = np.array(values, dtype=float)
        rows, cols = table.shape

        def evaluator(x, y):
            i = np.clip(np.floor(x * rows).astype(int), 0, rows - 1)
            j = np.clip(np.floor(y * cols).astype(int), 0, cols - 1)
            return table[i, j]

        return cls(source=source, evaluator=evaluator)


def parse_cost(expr: str, **metadata) -> CostFunction:
    """
    Parse a cost expression in x and y.

    Args:
        expr: Expression text, e.g. "sin(pi*x)*cos(pi*y)"
        **metadata: Optional claim flags forwarded to CostFunction

    Returns:
        CostFunction evaluating the expression, with singular lines detected
        from monomial divisors
    """
    tree = parse_expression(expr, ("x", "y"))
    singular = singular_variables(tree)
    if singular:
        logger.debug(f"Expression {expr!r} is singular on {', '.join(v + '=0' for v in singular)}")
    return CostFunction(
        source=expr,
        evaluator=compile_expression(tree, ("x", "y")),
        singular_axes=singular,
        expression=tree,
        **metadata,
    )


def parse_phi(expr: str) -> Callable[[np.ndarray], np.ndarray]:
    """Parse a one-variable function of z, e.g. "sin(pi*z)", into a vectorized callable."""
    tree = parse_expression(expr, ("z",))
    compiled = compile_expression(tree, ("z",))

    def phi(z):
        z = np.asarray(z, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.array(np.broadcast_to(np.asarray(compiled(z), dtype=float), z.shape))
        return float(out) if out.ndim == 0 else out

    return phi
