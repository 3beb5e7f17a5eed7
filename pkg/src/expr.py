"""
Analytic expression language for chart components.

Grammar::

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*
    unary := "-" unary | power
    power := atom ("^" ["+" | "-"] integer)?
    atom  := number | "pi" | "e" | "x" index | fn "(" expr ")" | "(" expr ")"
    index := "0" | nonzero digit followed by digits
    fn    := sin | cos | tan | exp | log | sqrt | sinh | cosh | tanh

Whitespace is ignored. Error offsets are byte offsets into the UTF-8 text. Nesting
of parentheses, calls and unary minus is bounded by ``MAX_DEPTH``.
"""
import logging
import math
import re
from dataclasses import dataclass, field
from typing import FrozenSet, List, NamedTuple, Sequence, Tuple, Union

from src.errors import (
    ArgumentError,
    CoordinateRangeError,
    ExponentError,
    ExpressionSyntaxError,
    JetEvaluationError,
    UnknownIdentifierError,
)
from src.jets import ELEMENTARY, Jet, jet_arith, jet_const, jet_coordinate, jet_elementary

logger = logging.getLogger('norden-lab.expr')

Span = Tuple[int, int]

CONSTANTS = {"pi": math.pi, "e": math.e}

# binding strength used by the printer
PREC_ADD = 1
PREC_MUL = 2
PREC_UNARY = 3
PREC_POWER = 4
PREC_ATOM = 5

_TOKEN = re.compile(rb"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)

_COORDINATE = re.compile(r"x(0|[1-9]\d*)\Z")

# parenthesis, call and unary-minus nesting accepted by the parser
MAX_DEPTH = 100


class Token(NamedTuple):
    kind: str
    text: str
    start: int
    end: int


def tokenize(source: bytes) -> List[Token]:
    """Split UTF-8 bytes into tokens; the list always ends with an END token."""
    tokens = []
    pos = 0
    while pos < len(source):
        match = _TOKEN.match(source, pos)
        if match is None:
            char = source[pos:pos + 4].decode("utf-8", errors="replace")[:1]
            raise ExpressionSyntaxError(f"unexpected character '{char}'", pos)
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, match.group().decode("ascii"), match.start(), match.end()))
        pos = match.end()
    tokens.append(Token("end", "", len(source), len(source)))
    return tokens


@dataclass(frozen=True)
class _Scope:
    point: Tuple[float, ...]
    dim: int
    order: int
    source: str


def _annotate(exc: JetEvaluationError, span: Span, scope: _Scope) -> JetEvaluationError:
    return exc.with_span(span, scope.source)


def _format_number(value: float) -> str:
    if value.is_integer():
        return str(int(value))
    return repr(value)


@dataclass(frozen=True)
class Number:
    value: float
    span: Span = field(default=(0, 0), compare=False)

    prec = PREC_ATOM

    def evaluate(self, scope: _Scope) -> Jet:
        return jet_const(self.value, scope.dim, scope.order)

    def coordinates(self) -> FrozenSet[int]:
        return frozenset()

    def render(self) -> str:
        return _format_number(self.value)


@dataclass(frozen=True)
class Constant:
    name: str
    span: Span = field(default=(0, 0), compare=False)

    prec = PREC_ATOM

    def evaluate(self, scope: _Scope) -> Jet:
        return jet_const(CONSTANTS[self.name], scope.dim, scope.order)

    def coordinates(self) -> FrozenSet[int]:
        return frozenset()

    def render(self) -> str:
        return self.name


@dataclass(frozen=True)
class Coordinate:
    index: int
    span: Span = field(default=(0, 0), compare=False)

    prec = PREC_ATOM

    def evaluate(self, scope: _Scope) -> Jet:
        return jet_coordinate(self.index, scope.point[self.index - 1], scope.dim, scope.order)

    def coordinates(self) -> FrozenSet[int]:
        return frozenset((self.index,))

    def render(self) -> str:
        return f"x{self.index}"


@dataclass(frozen=True)
class Negate:
    operand: "Node"
    span: Span = field(default=(0, 0), compare=False)

    prec = PREC_UNARY

    def evaluate(self, scope: _Scope) -> Jet:
        return -self.operand.evaluate(scope)

    def coordinates(self) -> FrozenSet[int]:
        return self.operand.coordinates()

    def render(self) -> str:
        return "-" + _wrap(self.operand, self.operand.prec < PREC_UNARY)


_BINARY = {"+": ("add", PREC_ADD), "-": ("sub", PREC_ADD), "*": ("mul", PREC_MUL), "/": ("div", PREC_MUL)}


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: "Node"
    right: "Node"
    span: Span = field(default=(0, 0), compare=False)

    @property
    def prec(self) -> int:
        return _BINARY[self.op][1]

    def evaluate(self, scope: _Scope) -> Jet:
        left = self.left.evaluate(scope)
        right = self.right.evaluate(scope)
        try:
            return jet_arith(_BINARY[self.op][0], left, right)
        except JetEvaluationError as exc:
            raise _annotate(exc, self.span, scope) from None

    def coordinates(self) -> FrozenSet[int]:
        return self.left.coordinates() | self.right.coordinates()

    def render(self) -> str:
        prec = self.prec
        return (_wrap(self.left, self.left.prec < prec) + self.op
                + _wrap(self.right, self.right.prec <= prec))


@dataclass(frozen=True)
class Power:
    base: "Node"
    exponent: int
    span: Span = field(default=(0, 0), compare=False)

    prec = PREC_POWER

    def evaluate(self, scope: _Scope) -> Jet:
        base = self.base.evaluate(scope)
        try:
            return jet_arith("int_pow", base, self.exponent)
        except JetEvaluationError as exc:
            raise _annotate(exc, self.span, scope) from None

    def coordinates(self) -> FrozenSet[int]:
        return self.base.coordinates()

    def render(self) -> str:
        return f"{_wrap(self.base, self.base.prec < PREC_ATOM)}^{self.exponent}"


@dataclass(frozen=True)
class Call:
    function: str
    argument: "Node"
    span: Span = field(default=(0, 0), compare=False)

    prec = PREC_ATOM

    def evaluate(self, scope: _Scope) -> Jet:
        argument = self.argument.evaluate(scope)
        try:
            return jet_elementary(self.function, argument)
        except JetEvaluationError as exc:
            raise _annotate(exc, self.span, scope) from None

    def coordinates(self) -> FrozenSet[int]:
        return self.argument.coordinates()

    def render(self) -> str:
        return f"{self.function}({self.argument.render()})"


Node = Union[Number, Constant, Coordinate, Negate, BinaryOp, Power, Call]


def _wrap(node, parenthesize: bool) -> str:
    text = node.render()
    return f"({text})" if parenthesize else text


class _Parser:
    """Recursive-descent parser over the token list."""

    def __init__(self, source: bytes, dim: int):
        self.tokens = tokenize(source)
        self.pos = 0
        self.dim = dim
        self.depth = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, text: str) -> Token:
        token = self.current
        if token.text != text or token.kind not in ("op",):
            found = "end of input" if token.kind == "end" else f"'{token.text}'"
            raise ExpressionSyntaxError(f"expected '{text}', found {found}", token.start)
        return self.advance()

    def parse(self):
        node = self.expr()
        token = self.current
        if token.kind != "end":
            raise ExpressionSyntaxError(f"unexpected '{token.text}'", token.start)
        return node

    def expr(self):
        node = self.term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = self.advance().text
            right = self.term()
            node = BinaryOp(op, node, right, span=(node.span[0], right.span[1]))
        return node

    def term(self):
        node = self.unary()
        while self.current.kind == "op" and self.current.text in "*/":
            op = self.advance().text
            right = self.unary()
            node = BinaryOp(op, node, right, span=(node.span[0], right.span[1]))
        return node

    def unary(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise ExpressionSyntaxError("nesting too deep", self.current.start)
        try:
            if self.current.kind == "op" and self.current.text == "-":
                start = self.advance().start
                operand = self.unary()
                return Negate(operand, span=(start, operand.span[1]))
            return self.power()
        finally:
            self.depth -= 1

    def power(self):
        base = self.atom()
        if not (self.current.kind == "op" and self.current.text == "^"):
            return base
        caret = self.advance()
        sign = 1
        if self.current.kind == "op" and self.current.text in "+-":
            sign = -1 if self.advance().text == "-" else 1
        token = self.current
        if token.kind != "number" or not token.text.isdigit():
            raise ExponentError("exponent must be an integer literal", token.start if token.kind != "end" else caret.end)
        self.advance()
        return Power(base, sign * int(token.text), span=(base.span[0], token.end))

    def atom(self):
        token = self.current
        if token.kind == "number":
            self.advance()
            value = float(token.text)
            if not math.isfinite(value):
                raise ExpressionSyntaxError("numeric literal out of range", token.start)
            return Number(value, span=(token.start, token.end))
        if token.kind == "ident":
            return self.identifier()
        if token.kind == "op" and token.text == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        found = "end of input" if token.kind == "end" else f"'{token.text}'"
        raise ExpressionSyntaxError(f"unexpected {found}", token.start)

    def identifier(self):
        token = self.advance()
        name = token.text
        span = (token.start, token.end)
        if name in ELEMENTARY:
            self.expect("(")
            argument = self.expr()
            close = self.expect(")")
            return Call(name, argument, span=(token.start, close.end))
        if name in CONSTANTS:
            return Constant(name, span=span)
        match = _COORDINATE.match(name)
        if match:
            index = int(match.group(1))
            if not 1 <= index <= self.dim:
                raise CoordinateRangeError(
                    f"coordinate '{name}' outside x1..x{self.dim}", token.start)
            return Coordinate(index, span=span)
        raise UnknownIdentifierError(f"unknown identifier '{name}'", token.start)


@dataclass(frozen=True)
class Expression:
    """Parsed expression bound to a coordinate dimension."""
    root: object
    dim: int
    source: str = field(default="", compare=False)

    def eval_jet(self, point: Sequence[float], order: int) -> Jet:
        return eval_jet(self, point, order)

    @property
    def free_variables(self) -> FrozenSet[int]:
        return self.root.coordinates()

    def to_text(self) -> str:
        return self.root.render()

    def __str__(self) -> str:
        return self.to_text()


def parse(text: str, dim: int) -> Expression:
    """
    Parse expression text for a chart of dimension ``dim``.

    Args:
        text (str): expression source
        dim (int): number of coordinates; references must lie in x1..x<dim>

    Returns:
        Expression: the parsed tree

    Raises:
        ExpressionSyntaxError, UnknownIdentifierError, CoordinateRangeError,
        ExponentError: each with the byte offset of the offending token
    """
    if not isinstance(dim, int) or dim < 1:
        raise ArgumentError(f"dimension must be a positive integer, got {dim!r}")
    root = _Parser(text.encode("utf-8"), dim).parse()
    return Expression(root, dim, text)


def eval_jet(e: Expression, point: Sequence[float], order: int) -> Jet:
    """Evaluate ``e`` as a jet of the given order at ``point``."""
    if len(point) != e.dim:
        raise ArgumentError(f"point has {len(point)} coordinates, expression expects {e.dim}")
    scope = _Scope(tuple(float(x) for x in point), e.dim, order, e.source)
    jet = e.root.evaluate(scope)
    try:
        return jet.checked(context=f"'{e.source}'")
    except JetEvaluationError as exc:
        raise _annotate(exc, e.root.span, scope) from None


def free_variables(e: Expression) -> FrozenSet[int]:
    """Coordinate indices (1-based) that occur in ``e``."""
    return e.free_variables


def to_text(e: Expression) -> str:
    """Canonical text; parsing it again yields a structurally equal tree."""
    return e.to_text()
