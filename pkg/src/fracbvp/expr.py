"""Closed-world expression language for right-hand sides f(t, u, v).

Grammar (EBNF; see docs/expression-grammar.md for the full description):

    expr   = term { ("+" | "-") term } ;
    term   = unary { ("*" | "/") unary } ;
    unary  = "-" unary | power ;
    power  = atom [ "^" unary ] ;
    atom   = NUMBER | "pi" | VARIABLE | FUNCTION "(" expr ")" | "(" expr ")" ;

with VARIABLE one of t, u, v and FUNCTION one of sin, cos, exp, ln, sqrt,
abs.  "^" is right-associative and binds tighter than unary minus, which
binds tighter than "*" and "/", which bind tighter than "+" and "-".
Whitespace is insignificant.  There is no implicit multiplication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .errors import DomainError, EvaluationError, ParseError, UnknownIdentifierError

VARIABLES = ("t", "u", "v")
FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt", "abs")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]

_ATOM_EXPECTED = ("number", "'pi'", "variable", "function", "'('", "'-'")


@dataclass(frozen=True)
class _Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    offset: int  # 1-based byte offset in the source


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        start = i
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            i += 1
            while i < n and source[i].isdigit():
                i += 1
            if i < n and source[i] == ".":
                i += 1
                while i < n and source[i].isdigit():
                    i += 1
            if i < n and source[i] in "eE":
                j = i + 1
                if j < n and source[j] in "+-":
                    j += 1
                if j < n and source[j].isdigit():
                    i = j + 1
                    while i < n and source[i].isdigit():
                        i += 1
            tokens.append(_Token("num", source[start:i], start + 1))
            continue
        if c.isalpha():
            i += 1
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
            tokens.append(_Token("ident", source[start:i], start + 1))
            continue
        if c in "+-*/^()":
            tokens.append(_Token("op", c, start + 1))
            i += 1
            continue
        raise ParseError(
            f"unexpected character {c!r} at offset {start + 1}",
            start + 1,
            _ATOM_EXPECTED,
        )
    tokens.append(_Token("end", "", n + 1))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def match_op(self, *ops: str) -> _Token | None:
        tok = self.peek()
        if tok.kind == "op" and tok.text in ops:
            return self.advance()
        return None

    def fail(self, expected: tuple[str, ...]) -> ParseError:
        tok = self.peek()
        shown = tok.text if tok.kind != "end" else "end of input"
        return ParseError(
            f"unexpected {shown!r} at offset {tok.offset}; "
            f"expected one of: {', '.join(expected)}",
            tok.offset,
            expected,
        )

    def parse(self) -> Expr:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise self.fail(("operator", "end of input"))
        return node

    def expr(self) -> Expr:
        node = self.term()
        while (tok := self.match_op("+", "-")) is not None:
            node = BinOp(tok.text, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while (tok := self.match_op("*", "/")) is not None:
            node = BinOp(tok.text, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.match_op("-") is not None:
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        node = self.atom()
        if self.match_op("^") is not None:
            # right-associative; unary here lets exponents carry their sign
            return BinOp("^", node, self.unary())
        return node

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if name == "pi":
                return Num(math.pi)
            if name in VARIABLES:
                return Var(name)
            if name in FUNCTIONS:
                if self.match_op("(") is None:
                    raise self.fail(("'('",))
                arg = self.expr()
                if self.match_op(")") is None:
                    raise self.fail(("')'",))
                return Call(name, arg)
            raise UnknownIdentifierError(
                f"unknown identifier {name!r} at offset {tok.offset}",
                tok.offset,
                ("variable t, u, v", "function", "'pi'"),
            )
        if self.match_op("(") is not None:
            node = self.expr()
            if self.match_op(")") is None:
                raise self.fail(("')'",))
            return node
        raise self.fail(_ATOM_EXPECTED)


def parse(source: str) -> Expr:
    """Parse source text into an expression tree.

    Raises :class:`ParseError` with a 1-based byte offset and the set of
    acceptable tokens; unknown names raise :class:`UnknownIdentifierError`.
    """
    if not isinstance(source, str):
        raise ParseError("expression source must be a string", 1, ())
    return _Parser(source).parse()


def _pow(base: float, exponent: float) -> float:
    if base == 0.0 and exponent < 0.0:
        raise EvaluationError("zero raised to a negative power")
    if base < 0.0 and exponent != math.floor(exponent):
        raise EvaluationError("fractional power of a negative base")
    try:
        return math.pow(base, exponent)
    except OverflowError:
        raise EvaluationError("overflow in power") from None


def evaluate(e: Expr, t: float, u: float, v: float) -> float:
    """Evaluate the tree at the point (t, u, v).

    Deterministic tree walk; raises :class:`EvaluationError` on division by
    zero, ln of a non-positive value, sqrt of a negative value, fractional
    powers of negative bases, and floating-point overflow.
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return {"t": t, "u": u, "v": v}[e.name]
    if isinstance(e, Neg):
        return -evaluate(e.operand, t, u, v)
    if isinstance(e, BinOp):
        a = evaluate(e.left, t, u, v)
        b = evaluate(e.right, t, u, v)
        if e.op == "+":
            out = a + b
        elif e.op == "-":
            out = a - b
        elif e.op == "*":
            out = a * b
        elif e.op == "/":
            if b == 0.0:
                raise EvaluationError("division by zero")
            out = a / b
        else:
            out = _pow(a, b)
        if not math.isfinite(out):
            raise EvaluationError(f"non-finite result from {e.op!r}")
        return out
    if isinstance(e, Call):
        x = evaluate(e.arg, t, u, v)
        if e.func == "sin":
            return math.sin(x)
        if e.func == "cos":
            return math.cos(x)
        if e.func == "exp":
            try:
                return math.exp(x)
            except OverflowError:
                raise EvaluationError("overflow in exp") from None
        if e.func == "ln":
            if x <= 0.0:
                raise EvaluationError("ln of a non-positive value")
            return math.log(x)
        if e.func == "sqrt":
            if x < 0.0:
                raise EvaluationError("sqrt of a negative value")
            return math.sqrt(x)
        return abs(x)
    raise TypeError(f"not an expression node: {e!r}")


def to_source(e: Expr) -> str:
    """Print a tree back to parseable source.

    Fully parenthesized, so operator precedence never changes the shape:
    parse(to_source(x)) is structurally equal to x.
    """
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_source(e.operand)})"
    if isinstance(e, BinOp):
        return f"({to_source(e.left)} {e.op} {to_source(e.right)})"
    if isinstance(e, Call):
        return f"{e.func}({to_source(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


def lipschitz_estimate(e: Expr, t_samples: int = 65, bound: float = 10.0) -> float:
    """Sampled bound on max(|df/du|, |df/dv|) over [0,1] x [-bound, bound]^2.

    Central differences with step 1e-6 * (1 + |coordinate|) at every point of
    a t grid crossed with a 5-point lattice per state axis.  This is an
    estimate, not a certified constant: it can undershoot the true Lipschitz
    constant between samples.
    """
    if t_samples < 16:
        raise DomainError(f"need at least 16 t samples, got {t_samples}")
    if not (math.isfinite(bound) and bound > 0.0):
        raise DomainError(f"state bound must be > 0, got {bound!r}")
    ts = [i / (t_samples - 1) for i in range(t_samples)]
    lattice = [-bound, -0.5 * bound, 0.0, 0.5 * bound, bound]
    best = 0.0
    for t in ts:
        for u in lattice:
            du = 1e-6 * (1.0 + abs(u))
            for v in lattice:
                dv = 1e-6 * (1.0 + abs(v))
                fu = (evaluate(e, t, u + du, v) - evaluate(e, t, u - du, v)) / (2 * du)
                fv = (evaluate(e, t, u, v + dv) - evaluate(e, t, u, v - dv)) / (2 * dv)
                best = max(best, abs(fu), abs(fv))
    return best
