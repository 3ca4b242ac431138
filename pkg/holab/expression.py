"""
A small expression language for vector fields and graph foliations.

Grammar (lowest to highest precedence)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" unary)?          # right-associative
    atom    := NUMBER | NAME | NAME "(" expr ")" | "(" expr ")"

Names are the variables ``x``, ``y1`` ... ``y{n-1}`` (``y`` aliases ``y1``
when n = 2) and the functions ``sin``, ``cos``, ``exp``, ``tanh``.
Expressions are immutable trees; they evaluate on floats or numpy arrays,
differentiate symbolically and print back to parseable source.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Set, Tuple, Union

import numpy as np

from holab.exceptions import ExpressionError

logger = logging.getLogger(__name__)

Value = Union[float, np.ndarray]

FUNCTIONS: Dict[str, Callable[[Value], Value]] = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "tanh": np.tanh,
}

_BINARY: Dict[str, Callable[[Value, Value], Value]] = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}

# Binding strength used by the printer.
_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


# -- syntax tree ---------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float
    span: Tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    span: Tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expression"
    span: Tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expression"
    right: "Expression"
    span: Tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expression"
    span: Tuple[int, int] = field(default=(0, 0), compare=False, repr=False)


Expression = Union[Num, Var, Neg, BinOp, Call]


def variable_names(dim: int) -> Set[str]:
    """Names allowed for a model on R^dim: x, y1..y{dim-1}, and y when dim = 2."""
    if dim < 1:
        raise ValueError("Ambient dimension must be positive")
    names = {"x"} | {f"y{i}" for i in range(1, dim)}
    if dim == 2:
        names.add("y")
    return names


# -- tokenizer -----------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "name", "op", "end"
    text: str
    offset: int


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def tokenize(source: str) -> Iterator[Token]:
    """
    Split source into tokens with their offsets.

    Raises:
        ExpressionError: On a character that starts no token
    """
    pos = 0
    while True:
        while pos < len(source) and source[pos].isspace():
            pos += 1
        if pos == len(source):
            yield Token("end", "", pos)
            return
        match = _TOKEN.match(source, pos)
        if match is None or match.lastgroup is None:
            raise ExpressionError(f"unexpected character {source[pos]!r}", source, pos)
        kind = match.lastgroup
        yield Token(kind, match.group(kind), match.start(kind))
        pos = match.end()


# -- parser --------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str, variables: Optional[Set[str]]):
        self.source = source
        self.variables = variables
        self.tokens: List[Token] = list(tokenize(source))
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def error(self, message: str, token: Token) -> ExpressionError:
        return ExpressionError(message, self.source, token.offset, max(1, len(token.text)))

    def expect(self, text: str) -> Token:
        if self.current.text != text:
            found = self.current.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}", self.current)
        return self.advance()

    def parse(self) -> Expression:
        if self.current.kind == "end":
            raise self.error("empty expression", self.current)
        tree = self.expr()
        if self.current.kind != "end":
            raise self.error(f"unexpected {self.current.text!r}", self.current)
        return tree

    def expr(self) -> Expression:
        left = self.term()
        while self.current.text in ("+", "-"):
            op = self.advance().text
            right = self.term()
            left = BinOp(op, left, right, (left.span[0], right.span[1]))
        return left

    def term(self) -> Expression:
        left = self.unary()
        while self.current.text in ("*", "/"):
            op = self.advance().text
            right = self.unary()
            left = BinOp(op, left, right, (left.span[0], right.span[1]))
        return left

    def unary(self) -> Expression:
        if self.current.text == "-":
            start = self.advance().offset
            operand = self.unary()
            return Neg(operand, (start, operand.span[1]))
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        if self.current.text == "^":
            self.advance()
            exponent = self.unary()
            return BinOp("^", base, exponent, (base.span[0], exponent.span[1]))
        return base

    def atom(self) -> Expression:
        token = self.current
        if token.kind == "num":
            self.advance()
            return Num(float(token.text), (token.offset, token.offset + len(token.text)))
        if token.kind == "name":
            self.advance()
            if token.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                close = self.expect(")")
                return Call(token.text, arg, (token.offset, close.offset + 1))
            if self.variables is not None and token.text not in self.variables:
                raise self.error(f"unknown identifier {token.text!r}", token)
            if self.variables is None and not re.fullmatch(r"x|y\d*", token.text):
                raise self.error(f"unknown identifier {token.text!r}", token)
            return Var(token.text, (token.offset, token.offset + len(token.text)))
        if token.text == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        found = token.text or "end of input"
        raise self.error(f"unexpected {found!r}", token)


def parse_expression(source: str, dim: Optional[int] = None) -> Expression:
    """
    Parse source text into an expression tree.

    Args:
        source: Expression text
        dim: Ambient dimension n; restricts names to x, y1..y{n-1}
            (and y when n = 2). Without it any x, y, y<k> is accepted.

    Returns:
        The parse tree; every node carries its source span

    Raises:
        ExpressionError: Syntax error or unknown identifier, with line/column

    Example:
        >>> evaluate(parse_expression("y^2"), {"y": 0.5})
        0.25
    """
    variables = variable_names(dim) if dim is not None else None
    return _Parser(source, variables).parse()


# -- evaluation ----------------------------------------------------------------


def _lookup(name: str, env: Mapping[str, Value]) -> Value:
    if name in env:
        return env[name]
    if name == "y" and "y1" in env:
        return env["y1"]
    if name == "y1" and "y" in env:
        return env["y"]
    raise ValueError(f"No value bound for variable {name!r}")


def evaluate(expr: Expression, env: Mapping[str, Value]) -> Value:
    """Evaluate with variables bound in ``env``; numpy arrays broadcast."""
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        return _lookup(expr.name, env)
    if isinstance(expr, Neg):
        return np.negative(evaluate(expr.operand, env))
    if isinstance(expr, BinOp):
        return _BINARY[expr.op](evaluate(expr.left, env), evaluate(expr.right, env))
    if isinstance(expr, Call):
        return FUNCTIONS[expr.func](evaluate(expr.arg, env))
    raise TypeError(f"Not an expression node: {expr!r}")


def free_variables(expr: Expression) -> Set[str]:
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, Neg):
        return free_variables(expr.operand)
    if isinstance(expr, BinOp):
        return free_variables(expr.left) | free_variables(expr.right)
    if isinstance(expr, Call):
        return free_variables(expr.arg)
    return set()


def bind(expr: Expression, dim: int) -> Callable[[np.ndarray], float]:
    """A function of a point p = (x, y1, ..., y{n-1}) in R^dim."""
    names = ["x"] + [f"y{i}" for i in range(1, dim)]

    def fn(point: np.ndarray) -> float:
        env = dict(zip(names, point))
        return float(evaluate(expr, env))

    return fn


# -- symbolic derivative -------------------------------------------------------


def _same_variable(name: str, wrt: str) -> bool:
    aliases = {"y", "y1"}
    return name == wrt or (name in aliases and wrt in aliases)


def _add(a: Expression, b: Expression) -> Expression:
    if a == Num(0.0):
        return b
    if b == Num(0.0):
        return a
    return BinOp("+", a, b)


def _sub(a: Expression, b: Expression) -> Expression:
    if b == Num(0.0):
        return a
    if a == Num(0.0):
        return Neg(b)
    return BinOp("-", a, b)


def _mul(a: Expression, b: Expression) -> Expression:
    if a == Num(0.0) or b == Num(0.0):
        return Num(0.0)
    if a == Num(1.0):
        return b
    if b == Num(1.0):
        return a
    return BinOp("*", a, b)


def derivative(expr: Expression, wrt: str) -> Optional[Expression]:
    """
    Symbolic partial derivative with respect to variable ``wrt``.

    Returns None when a power has a non-constant exponent (the grammar has
    no logarithm); callers then fall back to finite differences.
    """
    if isinstance(expr, Num):
        return Num(0.0)
    if isinstance(expr, Var):
        return Num(1.0) if _same_variable(expr.name, wrt) else Num(0.0)
    if isinstance(expr, Neg):
        inner = derivative(expr.operand, wrt)
        if inner is None:
            return None
        return Num(0.0) if inner == Num(0.0) else Neg(inner)
    if isinstance(expr, Call):
        inner = derivative(expr.arg, wrt)
        if inner is None:
            return None
        u = expr.arg
        outer: Expression
        if expr.func == "sin":
            outer = Call("cos", u)
        elif expr.func == "cos":
            outer = Neg(Call("sin", u))
        elif expr.func == "exp":
            outer = Call("exp", u)
        else:
            outer = BinOp("-", Num(1.0), BinOp("^", Call("tanh", u), Num(2.0)))
        return _mul(outer, inner)
    if isinstance(expr, BinOp):
        du = derivative(expr.left, wrt)
        dv = derivative(expr.right, wrt)
        u, v = expr.left, expr.right
        if expr.op == "^":
            if free_variables(v):
                return None
            if du is None:
                return None
            # d(u^c) = c·u^(c-1)·u'
            reduced = BinOp("^", u, BinOp("-", v, Num(1.0)))
            return _mul(_mul(v, reduced), du)
        if du is None or dv is None:
            return None
        if expr.op == "+":
            return _add(du, dv)
        if expr.op == "-":
            return _sub(du, dv)
        if expr.op == "*":
            return _add(_mul(du, v), _mul(u, dv))
        if expr.op == "/":
            numerator = _sub(_mul(du, v), _mul(u, dv))
            return BinOp("/", numerator, BinOp("^", v, Num(2.0)))
    raise TypeError(f"Not an expression node: {expr!r}")


# -- printer -------------------------------------------------------------------


def _precedence(expr: Expression) -> int:
    if isinstance(expr, BinOp):
        return _PRECEDENCE[expr.op]
    if isinstance(expr, Neg):
        return _PRECEDENCE["neg"]
    if isinstance(expr, Num) and expr.value < 0:
        return _PRECEDENCE["neg"]
    return _PRECEDENCE["atom"]


def _wrap(expr: Expression, needs_parens: bool) -> str:
    text = to_source(expr)
    return f"({text})" if needs_parens else text


def to_source(expr: Expression) -> str:
    """
    Print an expression so that parsing the text gives the same tree.

    Example:
        >>> to_source(parse_expression("sin(x) * (y + 1)"))
        'sin(x) * (y + 1.0)'
    """
    if isinstance(expr, Num):
        return repr(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Call):
        return f"{expr.func}({to_source(expr.arg)})"
    if isinstance(expr, Neg):
        return "-" + _wrap(expr.operand, _precedence(expr.operand) < _PRECEDENCE["neg"])
    if isinstance(expr, BinOp):
        own = _PRECEDENCE[expr.op]
        if expr.op == "^":
            left = _wrap(expr.left, _precedence(expr.left) < _PRECEDENCE["atom"])
            right = _wrap(expr.right, _precedence(expr.right) < own)
            return f"{left}^{right}"
        left = _wrap(expr.left, _precedence(expr.left) < own)
        right = _wrap(expr.right, _precedence(expr.right) <= own)
        return f"{left} {expr.op} {right}"
    raise TypeError(f"Not an expression node: {expr!r}")
