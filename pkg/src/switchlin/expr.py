"""Symbolic scalar expressions over state variables and named parameters.

The expression language is deliberately small: it covers exactly what is
needed to write control-affine dynamics and their Lie-derivative chains in
closed form, and to differentiate them symbolically without ever leaving
the language.  There is no general computer algebra here -- no trig
identities, no polynomial canonical forms, no floating exponents.

Grammar (infix, binary operators left-associative)::

    expr   := term (("+" | "-") term)*
    term   := power (("*" | "/") power)*
    power  := unary ("^" INTEGER)*
    unary  := "-" unary | atom
    atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"

Precedence from tightest to loosest: unary minus, ``^``, ``*`` and ``/``,
``+`` and ``-``.  Unary minus binds tighter than ``^``, so ``-x1^2``
parses as ``(-x1)^2``.  Exponents must be non-negative integer literals.
Identifiers ``x1 .. x<dim>`` are state variables; ``sin`` and ``cos`` must
be applied as functions; every other identifier is a named parameter.

``simplify`` applies a fixed rewrite system bottom-up, at each node until
stable, so the result is deterministic.  The complete rule set:

* constant folding for ``+ - * ^`` and negation (integer arithmetic stays
  exact; ``/`` folds only to an exact integer or when a float is involved,
  so simplified trees always print to text that re-parses identically),
* ``0*e -> 0``, ``e*0 -> 0``, ``1*e -> e``, ``e*1 -> e``,
* ``0+e -> e``, ``e+0 -> e``, ``e-0 -> e``, ``0-e -> -e``, ``e-e -> 0``,
* ``e/1 -> e``,
* ``e^0 -> 1``, ``e^1 -> e``,
* ``-(-e) -> e``,
* ``sin(0) -> 0``, ``cos(0) -> 1``.

A denominator that would fold to the zero constant is kept in its original
form, so simplified trees never contain a syntactically zero denominator
(construction of such a node is rejected outright).  Evaluating an
expression whose denominator vanishes raises :class:`EvaluationError`
carrying the offending subexpression.

All node types are immutable values: they hash, compare structurally, and
are safe to share between threads.  ``to_text`` emits fully parenthesised
text; parsing it back yields a structurally identical tree for every tree
the parser or the simplifier can produce.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence, Union

import numpy as np

__all__ = [
    "Add",
    "Bindings",
    "Constant",
    "Cos",
    "Div",
    "EvaluationError",
    "Expr",
    "ExprError",
    "IntPow",
    "Mul",
    "Negate",
    "ParseError",
    "Parameter",
    "ScalarField",
    "Sin",
    "StateVar",
    "Sub",
    "VectorField",
    "as_expr",
    "differentiate",
    "evaluate",
    "evaluate_many",
    "max_state_index",
    "parameter_names",
    "parse",
    "state_indices",
    "simplify",
    "to_text",
]

Real = Union[int, float, Fraction]


class ExprError(ValueError):
    """Malformed expression construction (bad node arguments)."""


class ParseError(ValueError):
    """Input text does not conform to the expression grammar."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (position {position})")
        self.position = position


class EvaluationError(ArithmeticError):
    """Expression could not be evaluated at the given bindings.

    ``expression`` holds the offending subexpression (for division by an
    exact zero, the division node itself).
    """

    def __init__(self, message: str, expression: "Expr | None" = None):
        super().__init__(message)
        self.expression = expression


class Expr:
    """Base class for expression-tree nodes.

    Arithmetic operators build new nodes, coercing int/float operands to
    constants, so fields can be written naturally::

        B, x1, x4 = Parameter("B"), StateVar(1), StateVar(4)
        a = 2 * B * x1 * x4
    """

    __slots__ = ()

    def __add__(self, other):
        return Add(self, as_expr(other))

    def __radd__(self, other):
        return Add(as_expr(other), self)

    def __sub__(self, other):
        return Sub(self, as_expr(other))

    def __rsub__(self, other):
        return Sub(as_expr(other), self)

    def __mul__(self, other):
        return Mul(self, as_expr(other))

    def __rmul__(self, other):
        return Mul(as_expr(other), self)

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __neg__(self):
        return Negate(self)

    def __pow__(self, exponent):
        return IntPow(self, exponent)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Constant(Expr):
    """Numeric literal: an exact integer or a finite float."""

    value: int | float

    def __post_init__(self):
        if isinstance(self.value, bool) or not isinstance(self.value, (int, float)):
            raise ExprError(
                f"constant must be an int or float, got {type(self.value).__name__}"
            )
        if isinstance(self.value, float) and not math.isfinite(self.value):
            raise ExprError("constant must be finite")


@dataclass(frozen=True)
class Parameter(Expr):
    """Named symbolic parameter, bound to a value only at evaluation time."""

    name: str

    def __post_init__(self):
        if (
            not isinstance(self.name, str)
            or not self.name.isidentifier()
            or self.name in _FUNCTION_NODES
        ):
            raise ExprError(f"invalid parameter name {self.name!r}")


@dataclass(frozen=True)
class StateVar(Expr):
    """State variable x<index>, 1-based."""

    index: int

    def __post_init__(self):
        if (
            isinstance(self.index, bool)
            or not isinstance(self.index, int)
            or self.index < 1
        ):
            raise ExprError(
                f"state variable index must be a positive integer, got {self.index!r}"
            )


@dataclass(frozen=True)
class Negate(Expr):
    operand: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr

    def __post_init__(self):
        if isinstance(self.right, Constant) and self.right.value == 0:
            raise ExprError("division by a syntactically zero denominator")


@dataclass(frozen=True)
class IntPow(Expr):
    """Integer power with a non-negative machine-integer exponent."""

    base: Expr
    exponent: int

    def __post_init__(self):
        if (
            isinstance(self.exponent, bool)
            or not isinstance(self.exponent, int)
            or self.exponent < 0
        ):
            raise ExprError(
                f"exponent must be a non-negative integer, got {self.exponent!r}"
            )


@dataclass(frozen=True)
class Sin(Expr):
    argument: Expr


@dataclass(frozen=True)
class Cos(Expr):
    argument: Expr


_FUNCTION_NODES = {"sin": Sin, "cos": Cos}


def as_expr(value) -> Expr:
    """Coerce an int or float to a Constant; pass expressions through."""
    if isinstance(value, Expr):
        return value
    if not isinstance(value, bool) and isinstance(value, (int, float)):
        return Constant(value)
    raise ExprError(f"cannot convert {type(value).__name__} to an expression")


def _children(node: Expr) -> tuple[Expr, ...]:
    match node:
        case Constant() | Parameter() | StateVar():
            return ()
        case Negate(operand=e) | Sin(argument=e) | Cos(argument=e):
            return (e,)
        case IntPow(base=b):
            return (b,)
        case (
            Add(left=l, right=r)
            | Sub(left=l, right=r)
            | Mul(left=l, right=r)
            | Div(left=l, right=r)
        ):
            return (l, r)
    raise TypeError(f"not an expression node: {node!r}")


def max_state_index(expr: Expr) -> int:
    """Largest state-variable index referenced; 0 if none."""
    if isinstance(expr, StateVar):
        return expr.index
    return max((max_state_index(c) for c in _children(expr)), default=0)


def state_indices(expr: Expr) -> frozenset[int]:
    """Indices of all state variables referenced by the expression."""
    if isinstance(expr, StateVar):
        return frozenset((expr.index,))
    out: frozenset[int] = frozenset()
    for child in _children(expr):
        out |= state_indices(child)
    return out


def parameter_names(expr: Expr) -> frozenset[str]:
    """Names of all parameters referenced by the expression."""
    if isinstance(expr, Parameter):
        return frozenset((expr.name,))
    out: frozenset[str] = frozenset()
    for child in _children(expr):
        out |= parameter_names(child)
    return out


# ---------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class Bindings:
    """Numeric values for parameters and the state vector.

    Parameter and state values may be ints, floats, or exact Fractions;
    exact inputs propagate exactly through the rational operators.
    """

    params: Mapping[str, Real]
    state: tuple[Real, ...]

    def __post_init__(self):
        object.__setattr__(self, "state", tuple(self.state))


def evaluate(expr: Expr, bindings: Bindings) -> float:
    """IEEE double value of the expression at the given bindings.

    Integer constants are carried as exact rationals internally, so trees
    built from integer literals and exact bindings round only once, at the
    final conversion.
    """
    return float(_eval(expr, bindings.params, bindings.state))


def _eval(node: Expr, params: Mapping[str, Real], state: Sequence[Real]):
    match node:
        case Constant(value=v):
            return Fraction(v) if isinstance(v, int) else v
        case Parameter(name=n):
            try:
                return params[n]
            except KeyError:
                raise EvaluationError(f"unbound parameter '{n}'", node) from None
        case StateVar(index=i):
            if i > len(state):
                raise EvaluationError(
                    f"state variable x{i} outside state vector of length {len(state)}",
                    node,
                )
            return state[i - 1]
        case Negate(operand=e):
            return -_eval(e, params, state)
        case Add(left=l, right=r):
            return _eval(l, params, state) + _eval(r, params, state)
        case Sub(left=l, right=r):
            return _eval(l, params, state) - _eval(r, params, state)
        case Mul(left=l, right=r):
            return _eval(l, params, state) * _eval(r, params, state)
        case Div(left=l, right=r):
            denominator = _eval(r, params, state)
            if denominator == 0:
                raise EvaluationError("division by zero", node)
            return _eval(l, params, state) / denominator
        case IntPow(base=b, exponent=n):
            return _eval(b, params, state) ** n
        case Sin(argument=a):
            return math.sin(_eval(a, params, state))
        case Cos(argument=a):
            return math.cos(_eval(a, params, state))
    raise TypeError(f"not an expression node: {node!r}")


def evaluate_many(
    expr: Expr, params: Mapping[str, Real], states: np.ndarray
) -> np.ndarray:
    """Vectorised evaluation over a batch of states, shape (n, dim).

    Uses raw IEEE semantics throughout (a vanishing denominator yields
    inf/nan rather than an error); intended for sampling loops where the
    expressions are known to be benign.
    """
    states = np.asarray(states, dtype=float)
    if states.ndim != 2:
        raise ValueError("states must be a 2-d array of shape (n, dim)")
    result = _eval_vec(expr, params, states)
    return np.broadcast_to(np.asarray(result, dtype=float), (states.shape[0],)).copy()


def _eval_vec(node: Expr, params: Mapping[str, Real], states: np.ndarray):
    match node:
        case Constant(value=v):
            return float(v)
        case Parameter(name=n):
            try:
                return float(params[n])
            except KeyError:
                raise EvaluationError(f"unbound parameter '{n}'", node) from None
        case StateVar(index=i):
            if i > states.shape[1]:
                raise EvaluationError(
                    f"state variable x{i} outside state vector of length "
                    f"{states.shape[1]}",
                    node,
                )
            return states[:, i - 1]
        case Negate(operand=e):
            return -_eval_vec(e, params, states)
        case Add(left=l, right=r):
            return _eval_vec(l, params, states) + _eval_vec(r, params, states)
        case Sub(left=l, right=r):
            return _eval_vec(l, params, states) - _eval_vec(r, params, states)
        case Mul(left=l, right=r):
            return _eval_vec(l, params, states) * _eval_vec(r, params, states)
        case Div(left=l, right=r):
            with np.errstate(divide="ignore", invalid="ignore"):
                return _eval_vec(l, params, states) / _eval_vec(r, params, states)
        case IntPow(base=b, exponent=n):
            return _eval_vec(b, params, states) ** n
        case Sin(argument=a):
            return np.sin(_eval_vec(a, params, states))
        case Cos(argument=a):
            return np.cos(_eval_vec(a, params, states))
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# differentiation


def differentiate(expr: Expr, var: int) -> Expr:
    """Exact partial derivative with respect to x<var> (1-based), simplified."""
    if isinstance(var, bool) or not isinstance(var, int) or var < 1:
        raise ExprError(f"differentiation variable must be a positive index, got {var!r}")
    return simplify(_diff(expr, var))


def _diff(node: Expr, var: int) -> Expr:
    match node:
        case Constant() | Parameter():
            return Constant(0)
        case StateVar(index=i):
            return Constant(1 if i == var else 0)
        case Negate(operand=e):
            return Negate(_diff(e, var))
        case Add(left=l, right=r):
            return Add(_diff(l, var), _diff(r, var))
        case Sub(left=l, right=r):
            return Sub(_diff(l, var), _diff(r, var))
        case Mul(left=l, right=r):
            return Add(Mul(_diff(l, var), r), Mul(l, _diff(r, var)))
        case Div(left=l, right=r):
            numerator = Sub(Mul(_diff(l, var), r), Mul(l, _diff(r, var)))
            return Div(numerator, IntPow(r, 2))
        case IntPow(base=b, exponent=n):
            if n == 0:
                return Constant(0)
            return Mul(Mul(Constant(n), IntPow(b, n - 1)), _diff(b, var))
        case Sin(argument=a):
            return Mul(Cos(a), _diff(a, var))
        case Cos(argument=a):
            return Mul(Negate(Sin(a)), _diff(a, var))
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# simplification


def simplify(expr: Expr) -> Expr:
    """Apply the module's fixed rewrite rules bottom-up (see module docs)."""
    match expr:
        case Constant() | Parameter() | StateVar():
            return expr
        case Negate(operand=e):
            node: Expr = Negate(simplify(e))
        case Add(left=l, right=r):
            node = Add(simplify(l), simplify(r))
        case Sub(left=l, right=r):
            node = Sub(simplify(l), simplify(r))
        case Mul(left=l, right=r):
            node = Mul(simplify(l), simplify(r))
        case Div(left=l, right=r):
            numerator, denominator = simplify(l), simplify(r)
            if isinstance(denominator, Constant) and denominator.value == 0:
                denominator = r  # keep: no syntactically zero denominators
            node = Div(numerator, denominator)
        case IntPow(base=b, exponent=n):
            node = IntPow(simplify(b), n)
        case Sin(argument=a):
            node = Sin(simplify(a))
        case Cos(argument=a):
            node = Cos(simplify(a))
        case _:
            raise TypeError(f"not an expression node: {expr!r}")
    while True:
        rewritten = _rewrite_step(node)
        if rewritten is None:
            return node
        node = rewritten


def _is_zero(node: Expr) -> bool:
    return isinstance(node, Constant) and node.value == 0


def _rewrite_step(node: Expr) -> Expr | None:
    """One local rewrite, or None when the node is stable."""
    match node:
        case Negate(operand=Constant(value=v)):
            return Constant(-v)
        case Negate(operand=Negate(operand=e)):
            return e
        case Add(left=Constant(value=a), right=Constant(value=b)):
            return Constant(a + b)
        case Add(left=l, right=r) if _is_zero(l):
            return r
        case Add(left=l, right=r) if _is_zero(r):
            return l
        case Sub(left=Constant(value=a), right=Constant(value=b)):
            return Constant(a - b)
        case Sub(left=l, right=r) if _is_zero(r):
            return l
        case Sub(left=l, right=r) if _is_zero(l):
            return Negate(r)
        case Sub(left=l, right=r) if l == r:
            return Constant(0)
        case Mul(left=Constant(value=a), right=Constant(value=b)):
            return Constant(a * b)
        case Mul(left=l, right=r) if _is_zero(l) or _is_zero(r):
            return Constant(0)
        case Mul(left=Constant(value=1), right=r):
            return r
        case Mul(left=l, right=Constant(value=1)):
            return l
        case Div(left=Constant(value=a), right=Constant(value=b)):
            if isinstance(a, float) or isinstance(b, float):
                return Constant(a / b)
            quotient = Fraction(a, b)
            if quotient.denominator == 1:
                return Constant(int(quotient))
            return None  # exact non-integer ratio: keep the division node
        case Div(left=l, right=Constant(value=1)):
            return l
        case IntPow(exponent=0):
            return Constant(1)
        case IntPow(base=b, exponent=1):
            return b
        case IntPow(base=Constant(value=v), exponent=n):
            return Constant(v**n)
        case Sin(argument=Constant(value=v)) if v == 0:
            return Constant(0)
        case Cos(argument=Constant(value=v)) if v == 0:
            return Constant(1)
    return None


# ---------------------------------------------------------------------------
# printing


def to_text(expr: Expr) -> str:
    """Parseable text with explicit parentheses around every compound node."""
    match expr:
        case Constant(value=v):
            return repr(v) if isinstance(v, float) else str(v)
        case Parameter(name=n):
            return n
        case StateVar(index=i):
            return f"x{i}"
        case Negate(operand=e):
            return f"(-{to_text(e)})"
        case Add(left=l, right=r):
            return f"({to_text(l)} + {to_text(r)})"
        case Sub(left=l, right=r):
            return f"({to_text(l)} - {to_text(r)})"
        case Mul(left=l, right=r):
            return f"({to_text(l)}*{to_text(r)})"
        case Div(left=l, right=r):
            return f"({to_text(l)}/{to_text(r)})"
        case IntPow(base=b, exponent=n):
            return f"({to_text(b)}^{n})"
        case Sin(argument=a):
            return f"sin({to_text(a)})"
        case Cos(argument=a):
            return f"cos({to_text(a)})"
    raise TypeError(f"not an expression node: {expr!r}")


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"(?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<symbol>[-+*/^()])"
)
_INT_RE = re.compile(r"\d+\Z")
_STATEVAR_RE = re.compile(r"x(\d+)\Z")


@dataclass
class _Token:
    kind: str  # "number" | "ident" | "symbol" | "end"
    text: str
    position: int
    value: int | float | None = None


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup == "number":
            literal = m.group()
            value = int(literal) if _INT_RE.match(literal) else float(literal)
            tokens.append(_Token("number", literal, pos, value))
        elif m.lastgroup == "ident":
            tokens.append(_Token("ident", m.group(), pos))
        else:
            tokens.append(_Token("symbol", m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], dim: int):
        self.tokens = tokens
        self.pos = 0
        self.dim = dim

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def at_symbol(self, *symbols: str) -> bool:
        token = self.peek()
        return token.kind == "symbol" and token.text in symbols

    def parse(self) -> Expr:
        expr = self.expression()
        token = self.peek()
        if token.kind != "end":
            raise ParseError(f"unexpected {token.text!r}", token.position)
        return expr

    def expression(self) -> Expr:
        left = self.term()
        while self.at_symbol("+", "-"):
            op = self.advance()
            right = self.term()
            left = Add(left, right) if op.text == "+" else Sub(left, right)
        return left

    def term(self) -> Expr:
        left = self.power()
        while self.at_symbol("*", "/"):
            op = self.advance()
            right = self.power()
            if op.text == "*":
                left = Mul(left, right)
            else:
                try:
                    left = Div(left, right)
                except ExprError:
                    raise ParseError("division by zero constant", op.position) from None
        return left

    def power(self) -> Expr:
        base = self.unary()
        while self.at_symbol("^"):
            caret = self.advance()
            token = self.peek()
            if token.kind != "number" or not isinstance(token.value, int):
                raise ParseError(
                    "exponent must be a non-negative integer literal", caret.position
                )
            self.advance()
            base = IntPow(base, token.value)
        return base

    def unary(self) -> Expr:
        if self.at_symbol("-"):
            self.advance()
            token = self.peek()
            if token.kind == "number":
                # negative literal, so printed constants re-parse identically
                self.advance()
                return Constant(-token.value)
            return Negate(self.unary())
        return self.atom()

    def atom(self) -> Expr:
        token = self.advance()
        if token.kind == "number":
            return Constant(token.value)
        if token.kind == "ident":
            if token.text in _FUNCTION_NODES:
                if not self.at_symbol("("):
                    raise ParseError(
                        f"expected '(' after function {token.text!r}",
                        self.peek().position,
                    )
                self.advance()
                argument = self.expression()
                self.expect_close()
                return _FUNCTION_NODES[token.text](argument)
            m = _STATEVAR_RE.match(token.text)
            if m:
                index = int(m.group(1))
                if not 1 <= index <= self.dim:
                    raise ParseError(
                        f"state index {index} out of range 1..{self.dim}",
                        token.position,
                    )
                return StateVar(index)
            return Parameter(token.text)
        if token.kind == "symbol" and token.text == "(":
            inner = self.expression()
            self.expect_close()
            return inner
        raise ParseError(
            f"expected a number, identifier, or '(', got {token.text or 'end of input'!r}",
            token.position,
        )

    def expect_close(self) -> None:
        token = self.peek()
        if not self.at_symbol(")"):
            raise ParseError("expected ')'", token.position)
        self.advance()


def parse(text: str, dim: int) -> "ScalarField":
    """Parse expression text into a scalar field over a dim-dimensional state."""
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise ExprError(f"dimension must be a positive integer, got {dim!r}")
    expr = _Parser(_tokenize(text), dim).parse()
    return ScalarField(expr, dim)


# ---------------------------------------------------------------------------
# fields


@dataclass(frozen=True)
class ScalarField:
    """A scalar-valued expression over a state space of fixed dimension."""

    expr: Expr
    dim: int

    def __post_init__(self):
        if isinstance(self.dim, bool) or not isinstance(self.dim, int) or self.dim < 1:
            raise ExprError(f"dimension must be a positive integer, got {self.dim!r}")
        top = max_state_index(self.expr)
        if top > self.dim:
            raise ExprError(
                f"expression references x{top} but the field dimension is {self.dim}"
            )

    def evaluate(self, bindings: Bindings) -> float:
        return evaluate(self.expr, bindings)

    def evaluate_many(
        self, params: Mapping[str, Real], states: np.ndarray
    ) -> np.ndarray:
        return evaluate_many(self.expr, params, states)

    def differentiate(self, var: int) -> "ScalarField":
        if not 1 <= var <= self.dim:
            raise ExprError(f"variable index {var} out of range 1..{self.dim}")
        return ScalarField(differentiate(self.expr, var), self.dim)

    def gradient(self) -> tuple["ScalarField", ...]:
        return tuple(self.differentiate(i) for i in range(1, self.dim + 1))

    def simplified(self) -> "ScalarField":
        return ScalarField(simplify(self.expr), self.dim)

    def is_zero(self) -> bool:
        """True when the field simplifies to the zero constant."""
        return _is_zero(simplify(self.expr))

    def __str__(self):
        return to_text(self.expr)


@dataclass(frozen=True)
class VectorField:
    """A vector field on R^n with n symbolic components."""

    components: tuple[Expr, ...]

    def __post_init__(self):
        components = tuple(self.components)
        if not components:
            raise ExprError("vector field needs at least one component")
        for component in components:
            if not isinstance(component, Expr):
                raise ExprError(
                    f"component must be an expression, got {type(component).__name__}"
                )
            top = max_state_index(component)
            if top > len(components):
                raise ExprError(
                    f"component references x{top} but the field dimension is "
                    f"{len(components)}"
                )
        object.__setattr__(self, "components", components)

    @classmethod
    def of(cls, *components) -> "VectorField":
        return cls(tuple(as_expr(c) for c in components))

    @property
    def dim(self) -> int:
        return len(self.components)

    def component_field(self, k: int) -> ScalarField:
        """Component k (1-based) as a scalar field on the same state space."""
        if not 1 <= k <= self.dim:
            raise ExprError(f"component index {k} out of range 1..{self.dim}")
        return ScalarField(self.components[k - 1], self.dim)

    def evaluate(self, bindings: Bindings) -> tuple[float, ...]:
        return tuple(evaluate(c, bindings) for c in self.components)

    def simplified(self) -> "VectorField":
        return VectorField(tuple(simplify(c) for c in self.components))

    def __str__(self):
        return "(" + ", ".join(to_text(c) for c in self.components) + ")"
