"""Expression language for the fractal monomial family.

Source text uses `a` for the fractal order, `x^(k*a)` for fractal monomials,
`E(k*x^a)` for E_alpha(k x^alpha) and `G(k)` for the deferred coefficient
Gamma(1+k*a)/Gamma(1+(k-1)*a). The order is bound only at evaluation.
"""
from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import special
from errors import DomainError, ParseError, UnboundVariable, UnsupportedForm
from series import DEFAULT_DEGREE, FractalSeries
from special import FractalOrder

logger = logging.getLogger(__name__)

VARIABLES = ("x", "t")


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Pow:
    """var ** (k * alpha) for a nonnegative integer k."""

    var: str
    k: int


@dataclass(frozen=True)
class Ml:
    """E_alpha(k * var ** alpha)."""

    k: float
    var: str


@dataclass(frozen=True)
class GammaRatio:
    k: int


@dataclass(frozen=True)
class Scale:
    coefficient: float
    body: "ExprAst"


@dataclass(frozen=True)
class Mul:
    factors: tuple["ExprAst", ...]


@dataclass(frozen=True)
class Sum:
    terms: tuple["ExprAst", ...]


ExprAst = Union[Number, Var, Pow, Ml, GammaRatio, Scale, Mul, Sum]
ZERO = Number(0.0)


# -- folding constructors -------------------------------------------------

def make_scale(c: float, body: ExprAst) -> ExprAst:
    c = float(c)
    if isinstance(body, Number):
        return Number(c * body.value)
    if c == 0:
        return ZERO
    if isinstance(body, Scale):
        return make_scale(c * body.coefficient, body.body)
    if c == 1:
        return body
    return Scale(c, body)


def negate(node: ExprAst) -> ExprAst:
    return make_scale(-1.0, node)


def make_mul(factors: list[ExprAst]) -> ExprAst:
    coefficient = 1.0
    kept: list[ExprAst] = []
    pending = list(factors)
    while pending:
        node = pending.pop(0)
        if isinstance(node, Number):
            coefficient *= node.value
        elif isinstance(node, Scale):
            coefficient *= node.coefficient
            pending.insert(0, node.body)
        elif isinstance(node, Mul):
            pending[:0] = list(node.factors)
        else:
            kept.append(node)
    if not kept:
        return Number(coefficient)
    body = kept[0] if len(kept) == 1 else Mul(tuple(kept))
    return make_scale(coefficient, body)


def make_sum(terms: list[ExprAst]) -> ExprAst:
    flat: list[ExprAst] = []
    for node in terms:
        if isinstance(node, Sum):
            flat.extend(node.terms)
        elif node != ZERO:
            flat.append(node)
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Sum(tuple(flat))


# -- parser ---------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<NUMBER>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<LETTER>[A-Za-z])"
    r"|(?P<OP>[-+*^()])"
    r"|(?P<SPACE>\s+)"
)
_FACTOR_START = frozenset({"NUMBER", "'x'", "'t'", "'E'", "'G'", "'('"})


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int

    def describe(self) -> str:
        return "end of input" if self.kind == "END" else repr(self.text)


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def _tokenize(text: str) -> list[_Token]:
    tokens, index = [], 0
    while index < len(text):
        match = _TOKEN.match(text, index)
        if match is None:
            raise ParseError(f"unexpected character {text[index]!r}", _byte_offset(text, index))
        if match.lastgroup != "SPACE":
            tokens.append(_Token(match.lastgroup, match.group(), _byte_offset(text, index)))
        index = match.end()
    tokens.append(_Token("END", "", _byte_offset(text, len(text))))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.position = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.position]

    def fail(self, expected: set[str] | frozenset[str]):
        raise ParseError(f"unexpected {self.current.describe()}", self.current.offset, frozenset(expected))

    def accept(self, text: str) -> bool:
        if self.current.kind != "NUMBER" and self.current.text == text:
            self.position += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.fail({repr(text)})

    def number(self) -> tuple[float, _Token]:
        token = self.current
        if token.kind != "NUMBER":
            self.fail({"NUMBER"})
        self.position += 1
        return float(token.text), token

    def integer(self, minimum: int) -> int:
        value, token = self.number()
        if not value.is_integer() or value < minimum:
            raise ParseError(f"expected an integer >= {minimum}, got {token.text}", token.offset)
        return int(value)

    def variable(self) -> str:
        if self.current.text in VARIABLES:
            name = self.current.text
            self.position += 1
            return name
        self.fail({repr(v) for v in VARIABLES})

    def parse(self) -> ExprAst:
        node = self.expr()
        if self.current.kind != "END":
            self.fail({"'+'", "'-'", "'*'", "end of input"})
        return node

    def expr(self) -> ExprAst:
        leading = self.accept("-")
        first = self.term()
        terms = [negate(first) if leading else first]
        while self.current.text in ("+", "-") and self.current.kind == "OP":
            minus = self.current.text == "-"
            self.position += 1
            node = self.term()
            terms.append(negate(node) if minus else node)
        return make_sum(terms)

    def term(self) -> ExprAst:
        factors = [self.factor()]
        while self.accept("*"):
            factors.append(self.factor())
        return make_mul(factors)

    def factor(self) -> ExprAst:
        token = self.current
        if token.kind == "NUMBER":
            return Number(self.number()[0])
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        if token.text in VARIABLES:
            name = self.variable()
            if self.accept("^"):
                return Pow(name, self.exponent())
            return Var(name)
        if self.accept("E"):
            return self.mittag_leffler()
        if self.accept("G"):
            self.expect("(")
            k = self.integer(1)
            self.expect(")")
            return GammaRatio(k)
        self.fail(_FACTOR_START)

    def exponent(self) -> int:
        if self.accept("a"):
            return 1
        self.expect("(")
        k = 1
        if self.current.kind == "NUMBER":
            k = self.integer(0)
            self.expect("*")
        self.expect("a")
        self.expect(")")
        return k

    def mittag_leffler(self) -> Ml:
        self.expect("(")
        k = 1.0
        sign = -1.0 if self.accept("-") else 1.0
        if self.current.kind == "NUMBER" or sign < 0:
            k = sign * self.number()[0]
            self.expect("*")
        name = self.variable()
        self.expect("^")
        self.expect("a")
        self.expect(")")
        return Ml(k, name)


def parse(text: str) -> ExprAst:
    """Parse source text into a canonical ExprAst."""
    if not text.strip():
        raise ParseError("empty expression", 0, _FACTOR_START)
    return _Parser(text).parse()


# -- printer --------------------------------------------------------------

def _number_text(value: float) -> str:
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def _is_negative(node: ExprAst) -> bool:
    return (isinstance(node, Number) and node.value < 0) or (isinstance(node, Scale) and node.coefficient < 0)


def _as_factor(node: ExprAst) -> str:
    text = to_text(node)
    return f"({text})" if isinstance(node, (Sum, Scale)) or (isinstance(node, Number) and node.value < 0) else text


def _as_term(node: ExprAst) -> str:
    text = to_text(node)
    return f"({text})" if isinstance(node, Sum) else text


def to_text(node: ExprAst) -> str:
    """Canonical source text; parse(to_text(ast)) == ast for parser output."""
    if isinstance(node, Number):
        return _number_text(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Pow):
        return f"{node.var}^({node.k}*a)"
    if isinstance(node, Ml):
        if node.k == 1:
            return f"E({node.var}^a)"
        return f"E({_number_text(node.k)}*{node.var}^a)"
    if isinstance(node, GammaRatio):
        return f"G({node.k})"
    if isinstance(node, Scale):
        if node.coefficient < 0:
            return "-" + to_text(make_scale(-node.coefficient, node.body)) if node.coefficient != -1 else "-" + _as_term(node.body)
        return f"{_number_text(node.coefficient)}*{_as_factor(node.body)}"
    if isinstance(node, Mul):
        return "*".join(_as_factor(f) for f in node.factors)
    if isinstance(node, Sum):
        parts = [_as_term(node.terms[0])]
        for term in node.terms[1:]:
            if _is_negative(term):
                parts.append(" - " + _as_term(negate(term)))
            else:
                parts.append(" + " + _as_term(term))
        return "".join(parts)
    raise UnsupportedForm(f"unknown node {node!r}", operation="to_text")


# -- rule table -----------------------------------------------------------

def _is_constant(node: ExprAst) -> bool:
    return isinstance(node, (Number, GammaRatio))


def diff_ast(node: ExprAst) -> ExprAst:
    """One local fractional derivative by the rule table; linear, no product or chain rule."""
    if isinstance(node, (Number, GammaRatio)):
        return ZERO
    if isinstance(node, Var):
        raise UnsupportedForm(
            f"bare variable {node.name!r} is not a fractal monomial; write {node.name}^(k*a)",
            operation="diff_ast",
        )
    if isinstance(node, Pow):
        if node.k == 0:
            return ZERO
        return make_mul([GammaRatio(node.k), Pow(node.var, node.k - 1)])
    if isinstance(node, Ml):
        return make_scale(node.k, node)
    if isinstance(node, Scale):
        return make_scale(node.coefficient, diff_ast(node.body))
    if isinstance(node, Sum):
        return make_sum([diff_ast(term) for term in node.terms])
    if isinstance(node, Mul):
        varying = [f for f in node.factors if not _is_constant(f)]
        if len(varying) > 1:
            raise UnsupportedForm(
                f"no product rule for {to_text(node)}", operation="diff_ast"
            )
        constants = [f for f in node.factors if _is_constant(f)]
        if not varying:
            return ZERO
        return make_mul(constants + [diff_ast(varying[0])])
    raise UnsupportedForm(f"unknown node {node!r}", operation="diff_ast")


# -- evaluation -----------------------------------------------------------

def _gamma_ratio(k: int, order: FractalOrder) -> float:
    ladder = order.ladder(k)
    return ladder[k] / ladder[k - 1]


def _binding(name: str, bindings: Mapping[str, float]) -> float:
    if name not in bindings:
        raise UnboundVariable(f"no value bound for {name!r}", operation="eval_ast")
    value = float(bindings[name])
    if value < 0:
        raise DomainError(f"{name}={value!r} is negative; fractal powers need values >= 0", operation="eval_ast")
    return value


def eval_ast(node: ExprAst, bindings: Mapping[str, float], order: FractalOrder) -> float:
    a = order.alpha
    if isinstance(node, Number):
        return node.value
    if isinstance(node, Var):
        return _binding(node.name, bindings)
    if isinstance(node, Pow):
        return special.fractal_pow(_binding(node.var, bindings), node.k * a)
    if isinstance(node, Ml):
        return special.ml(order, node.k * special.fractal_pow(_binding(node.var, bindings), a))
    if isinstance(node, GammaRatio):
        return _gamma_ratio(node.k, order)
    if isinstance(node, Scale):
        return node.coefficient * eval_ast(node.body, bindings, order)
    if isinstance(node, Mul):
        return math.prod(eval_ast(f, bindings, order) for f in node.factors)
    if isinstance(node, Sum):
        try:
            return math.fsum(eval_ast(term, bindings, order) for term in node.terms)
        except OverflowError:
            raise DomainError(f"sum overflows at {dict(bindings)!r}", operation="eval_ast") from None
    raise UnsupportedForm(f"unknown node {node!r}", operation="eval_ast")


def variables(node: ExprAst) -> frozenset[str]:
    if isinstance(node, Var):
        return frozenset({node.name})
    if isinstance(node, Pow):
        return frozenset({node.var})
    if isinstance(node, Ml):
        return frozenset({node.var})
    if isinstance(node, Scale):
        return variables(node.body)
    if isinstance(node, (Mul, Sum)):
        children = node.factors if isinstance(node, Mul) else node.terms
        return frozenset().union(*(variables(child) for child in children))
    return frozenset()


def _add(left: list[float], right: list[float]) -> list[float]:
    size = max(len(left), len(right))
    padded = [0.0] * size
    for k, c in enumerate(left):
        padded[k] += c
    for k, c in enumerate(right):
        padded[k] += c
    return padded


def _coefficients(node: ExprAst, order: FractalOrder, degree: int) -> list[float]:
    if isinstance(node, Number):
        return [node.value]
    if isinstance(node, Var):
        raise UnsupportedForm(f"bare variable {node.name!r} has no fractal series", operation="to_series")
    if isinstance(node, Pow):
        return [0.0] * node.k + [1.0]
    if isinstance(node, Ml):
        ladder = order.ladder(degree)
        return [node.k ** j / ladder[j] for j in range(degree + 1)]
    if isinstance(node, GammaRatio):
        return [_gamma_ratio(node.k, order)]
    if isinstance(node, Scale):
        return [node.coefficient * c for c in _coefficients(node.body, order, degree)]
    if isinstance(node, Sum):
        total: list[float] = []
        for term in node.terms:
            total = _add(total, _coefficients(term, order, degree))
        return total
    if isinstance(node, Mul):
        varying = [f for f in node.factors if not _is_constant(f)]
        if len(varying) > 1:
            raise UnsupportedForm(f"no series for the product {to_text(node)}", operation="to_series")
        scale = math.prod(eval_ast(f, {}, order) for f in node.factors if _is_constant(f))
        if not varying:
            return [scale]
        return [scale * c for c in _coefficients(varying[0], order, degree)]
    raise UnsupportedForm(f"unknown node {node!r}", operation="to_series")


def to_series(node: ExprAst, order: FractalOrder, degree: int = DEFAULT_DEGREE) -> FractalSeries:
    """Exact coefficients about 0; E_alpha terms are truncated at `degree`, monomials never are."""
    names = variables(node)
    if len(names) > 1:
        raise UnsupportedForm(f"expression mixes variables {sorted(names)}", operation="to_series")
    coeffs = _coefficients(node, order, degree)
    logger.debug("to_series %s -> %d coefficients", to_text(node), len(coeffs))
    return FractalSeries(order, 0.0, tuple(coeffs))
