"""Tiny arithmetic expression language for problem configuration.

Forcing terms, exact solutions, and Dirichlet data enter configuration
files as strings in a small language:

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' unary)?
    atom  := NUMBER | 'pi' | 'e' | VAR | FUNC '(' expr ')' | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so
``-x^2`` means ``-(x^2)`` and ``2^-3`` is legal.  Variables are ``x`` in
one dimension or ``x1``, ``x2`` in two; functions are exp, sin, cos,
sinh, cosh, log.  Parse errors carry the byte offset into the source.

`to_source` prints an AST so that reparsing reproduces it exactly
(parse -> print -> parse is the identity on parse results), and
`differentiate` produces exact symbolic derivatives, which is how
configured exact solutions supply their gradients.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

FUNCTIONS = ("exp", "sin", "cos", "sinh", "cosh", "log")
CONSTANTS = {"pi": np.pi, "e": np.e}
VARIABLES = ("x", "x1", "x2")


class ExpressionError(ValueError):
    """Parse or evaluation failure; `offset` is a byte offset when known."""

    def __init__(self, message: str, offset: int | None = None) -> None:
        self.offset = offset
        if offset is not None:
            message = f"{message} (byte {offset})"
        super().__init__(message)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Name:
    ident: str


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Node"


Node = Union[Num, Name, Neg, Bin, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
    r"|\d+(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _byte_offset(src: str, pos: int) -> int:
    return len(src[:pos].encode("utf-8"))


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == m.start():
            stripped = src[pos:].lstrip()
            if not stripped:
                break
            at = pos + (len(src[pos:]) - len(stripped))
            raise ExpressionError(
                f"unexpected character {stripped[0]!r}", _byte_offset(src, at)
            )
        start = m.start(m.lastgroup)
        tokens.append((m.lastgroup, m.group(m.lastgroup), _byte_offset(src, start)))
        pos = m.end()
    tokens.append(("end", "", _byte_offset(src, len(src))))
    return tokens


class _Parser:
    def __init__(self, src: str) -> None:
        if not src or not src.strip():
            raise ExpressionError("empty expression", 0)
        self.tokens = _tokenize(src)
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, text, offset = self.peek()
        if kind != "op" or text != op:
            raise ExpressionError(f"expected {op!r}", offset)
        self.take()

    def parse(self) -> Node:
        node = self.expr()
        kind, text, offset = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected trailing input {text!r}", offset)
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.take()
                node = Bin(text, node, self.term())
            else:
                return node

    def term(self) -> Node:
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.take()
                node = Bin(text, node, self.unary())
            else:
                return node

    def unary(self) -> Node:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.take()
            return Bin("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, text, offset = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            follows_paren = self.peek()[:2] == ("op", "(")
            if text in FUNCTIONS:
                if not follows_paren:
                    raise ExpressionError(
                        f"function {text!r} needs parenthesized arguments", offset
                    )
                self.take()
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            if text in CONSTANTS or text in VARIABLES:
                if follows_paren:
                    raise ExpressionError(f"{text!r} is not a function", offset)
                return Name(text)
            raise ExpressionError(f"unknown identifier {text!r}", offset)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        shown = text if text else "end of input"
        raise ExpressionError(f"unexpected {shown!r}", offset)


def parse_expression(src: str) -> Node:
    """Parse `src` into an AST; raises ExpressionError with a byte offset."""
    return _Parser(src).parse()


_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _precedence(node: Node) -> int:
    if isinstance(node, Bin):
        if node.op in "+-":
            return _PREC_ADD
        if node.op in "*/":
            return _PREC_MUL
        return _PREC_POW
    if isinstance(node, Neg):
        return _PREC_NEG
    return _PREC_ATOM


def _wrap(node: Node, minimum: int) -> str:
    text = to_source(node)
    return f"({text})" if _precedence(node) < minimum else text


def to_source(node: Node) -> str:
    """Print an AST so that parse(to_source(node)) == node for parsed nodes."""
    if isinstance(node, Num):
        if node.value == int(node.value) and abs(node.value) < 1e16:
            return str(int(node.value))
        return repr(node.value)
    if isinstance(node, Name):
        return node.ident
    if isinstance(node, Call):
        return f"{node.fn}({to_source(node.arg)})"
    if isinstance(node, Neg):
        return "-" + _wrap(node.arg, _PREC_NEG)
    if isinstance(node, Bin):
        if node.op == "^":
            # right-associative: parenthesize an exponent base of equal rank
            left = _wrap(node.left, _PREC_POW + 1)
            right = _wrap(node.right, _PREC_NEG)
            return f"{left}^{right}"
        prec = _PREC_ADD if node.op in "+-" else _PREC_MUL
        left = _wrap(node.left, prec)
        right = _wrap(node.right, prec + 1)  # left-associative chain
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an expression node: {node!r}")


_CALLS = {
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "sinh": np.sinh,
    "cosh": np.cosh,
}


def evaluate(node: Node, env: Mapping[str, object] | None = None):
    """Evaluate over scalars or numpy arrays supplied in `env`.

    Total on finite inputs (division by zero yields inf/nan) except that
    log of a nonpositive argument raises.
    """
    env = env or {}
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Name):
        if node.ident in env:
            return env[node.ident]
        if node.ident in CONSTANTS:
            return CONSTANTS[node.ident]
        raise ExpressionError(f"variable {node.ident!r} is undefined in this context")
    if isinstance(node, Neg):
        return -evaluate(node.arg, env)
    if isinstance(node, Bin):
        left = evaluate(node.left, env)
        right = evaluate(node.right, env)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            if node.op == "*":
                return left * right
            if node.op == "/":
                return np.divide(left, right)
            return np.power(left, right)
    if isinstance(node, Call):
        arg = evaluate(node.arg, env)
        if node.fn == "log":
            if np.any(np.asarray(arg) <= 0.0):
                raise ExpressionError("log of a nonpositive argument")
            return np.log(arg)
        with np.errstate(over="ignore"):
            return _CALLS[node.fn](arg)
    raise TypeError(f"not an expression node: {node!r}")


def _num(value: float) -> Node:
    return Num(value) if value >= 0 else Neg(Num(-value))


def _mul(a: Node, b: Node) -> Node:
    return Bin("*", a, b)


def differentiate(node: Node, var: str) -> Node:
    """Exact symbolic derivative with respect to `var` (no simplification)."""
    if isinstance(node, Num):
        return Num(0.0)
    if isinstance(node, Name):
        return Num(1.0) if node.ident == var else Num(0.0)
    if isinstance(node, Neg):
        return Neg(differentiate(node.arg, var))
    if isinstance(node, Bin):
        da = differentiate(node.left, var)
        db = differentiate(node.right, var)
        a, b = node.left, node.right
        if node.op in "+-":
            return Bin(node.op, da, db)
        if node.op == "*":
            return Bin("+", _mul(da, b), _mul(a, db))
        if node.op == "/":
            return Bin("/", Bin("-", _mul(da, b), _mul(a, db)), Bin("^", b, Num(2.0)))
        if isinstance(b, Num):  # a^c -> c a^(c-1) a'
            return _mul(_mul(Num(b.value), Bin("^", a, _num(b.value - 1.0))), da)
        # general a^b: a^b (b' log a + b a'/a)
        inner = Bin("+", _mul(db, Call("log", a)), _mul(b, Bin("/", da, a)))
        return _mul(Bin("^", a, b), inner)
    if isinstance(node, Call):
        da = differentiate(node.arg, var)
        a = node.arg
        chain = {
            "exp": Call("exp", a),
            "sin": Call("cos", a),
            "cos": Neg(Call("sin", a)),
            "sinh": Call("cosh", a),
            "cosh": Call("sinh", a),
        }
        if node.fn == "log":
            return Bin("/", da, a)
        return _mul(chain[node.fn], da)
    raise TypeError(f"not an expression node: {node!r}")
