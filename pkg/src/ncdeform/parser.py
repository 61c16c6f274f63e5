"""A small expression language for operators over the Weyl algebra.

Grammar::

    expr    := term (('+' | '-') term)*
    term    := unary ('*' unary)*
    unary   := '-' unary | postfix
    postfix := primary ('|0>')*
    primary := NUMBER | NAME | '[' expr ',' expr ']' | '(' expr ')'

Names: ``X_i``, ``D_i``, ``xhat_i``, ``M_i_j``, ``a_i``, ``Z``, ``Zinv``,
``Box``, ``s``, ``i``.  ``e|0>`` applies ``e`` to the constant function 1.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .scalar import ExactScalar, I, as_rational
from .weyl import D, Polynomial, WeylElement, X, apply, commutator, const, normal_product

__all__ = [
    "ParseError",
    "EvalError",
    "Num",
    "Atom",
    "BinOp",
    "Neg",
    "Comm",
    "Vac",
    "parse_expr",
    "to_text",
    "evaluate",
]


class ParseError(SyntaxError):
    """Syntax error with a 1-based ``line`` and ``col`` and what was expected there."""

    def __init__(self, message: str, line: int, col: int, expected: str):
        super().__init__(f"{message} at line {line}, col {col} (expected {expected})")
        self.line = line
        self.col = col
        self.expected = expected


class EvalError(ValueError):
    """An expression is well formed but cannot be evaluated under the given spec."""


# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: str


@dataclass(frozen=True)
class Atom:
    name: str
    indices: tuple = ()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Comm:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Vac:
    operand: "Node"


Node = Union[Num, Atom, BinOp, Neg, Comm, Vac]

_ATOMS = {
    "X": 1,
    "D": 1,
    "xhat": 1,
    "M": 2,
    "a": 1,
    "Z": 0,
    "Zinv": 0,
    "Box": 0,
    "s": 0,
    "i": 0,
}

# --- lexer -----------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>[ \t]+)|(?P<nl>\n)|(?P<vac>\|0>)|(?P<num>\d+(?:/\d+)?)"
    r"|(?P<name>[A-Za-z]+(?:_\d+)*)|(?P<sym>[-+*()\[\],])"
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _lex(text: str) -> list:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col, "a token")
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            toks.append(_Tok(kind, m.group(), line, col))
        pos = m.end()
    col = pos - line_start + 1
    toks.append(_Tok("eof", "", line, col))
    return toks


# --- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.peek()
        if tok.text != text or tok.kind == "eof":
            self.fail(repr(text))
        return self.next()

    def fail(self, expected: str):
        tok = self.peek()
        what = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"unexpected {what}", tok.line, tok.col, expected)

    def parse(self) -> Node:
        node = self.expr()
        if self.peek().kind != "eof":
            self.fail("an operator or end of input")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().text in ("+", "-") and self.peek().kind == "sym":
            op = self.next().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek().text == "*" and self.peek().kind == "sym":
            self.next()
            node = BinOp("*", node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek().text == "-" and self.peek().kind == "sym":
            self.next()
            return Neg(self.unary())
        return self.postfix()

    def postfix(self) -> Node:
        node = self.primary()
        while self.peek().kind == "vac":
            self.next()
            node = Vac(node)
        return node

    def primary(self) -> Node:
        tok = self.peek()
        if tok.kind == "num":
            self.next()
            return Num(tok.text)
        if tok.kind == "name":
            self.next()
            return _atom(tok)
        if tok.text == "[":
            self.next()
            left = self.expr()
            self.expect(",")
            right = self.expr()
            self.expect("]")
            return Comm(left, right)
        if tok.text == "(":
            self.next()
            node = self.expr()
            self.expect(")")
            return node
        self.fail("a number, a name, '[' or '('")


def _atom(tok: _Tok) -> Atom:
    parts = tok.text.split("_")
    base, idx = parts[0], tuple(int(p) for p in parts[1:])
    if base not in _ATOMS:
        raise ParseError(f"unknown name {tok.text!r}", tok.line, tok.col, "one of " + ", ".join(_ATOMS))
    if len(idx) != _ATOMS[base]:
        raise ParseError(
            f"{base} takes {_ATOMS[base]} index(es), got {len(idx)}", tok.line, tok.col, f"{_ATOMS[base]} index(es)"
        )
    return Atom(base, idx)


def parse_expr(text: str) -> Node:
    return _Parser(text).parse()


# --- printing --------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2}


def to_text(node: Node) -> str:
    """Canonical text; ``parse_expr(to_text(t)) == t``."""
    return _show(node, 0)


def _show(node: Node, ctx: int) -> str:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Atom):
        return "_".join([node.name] + [str(i) for i in node.indices])
    if isinstance(node, Comm):
        return f"[{_show(node.left, 0)}, {_show(node.right, 0)}]"
    if isinstance(node, Vac):
        return f"{_show(node.operand, 4)}|0>"
    if isinstance(node, Neg):
        out = f"-{_show(node.operand, 3)}"
        return f"({out})" if ctx > 3 else out
    p = _PREC[node.op]
    # left-associative: the right operand needs parentheses at equal precedence
    out = f"{_show(node.left, p)} {node.op} {_show(node.right, p + 1)}"
    return f"({out})" if ctx > p else out


# --- evaluation ------------------------------------------------------------


def evaluate(node: Node, spec) -> WeylElement:
    """Value of ``node`` under a ``RealizationSpec``; ``|0>`` results are multiplication operators."""
    from .realization import build_box, build_Z_pair

    n = spec.n
    cache: dict = {}

    def ev(nd):
        if isinstance(nd, Num):
            return const(n, ExactScalar(as_rational(nd.value)))
        if isinstance(nd, Atom):
            return atom(nd)
        if isinstance(nd, Neg):
            return -ev(nd.operand)
        if isinstance(nd, Comm):
            return commutator(ev(nd.left), ev(nd.right))
        if isinstance(nd, Vac):
            return apply(ev(nd.operand), Polynomial.one(n)).as_weyl()
        left, right = ev(nd.left), ev(nd.right)
        if nd.op == "+":
            return left + right
        if nd.op == "-":
            return left - right
        return normal_product(left, right)

    def atom(nd: Atom):
        for i in nd.indices:
            if not 0 <= i < n:
                raise EvalError(f"index {i} out of range for n = {n}")
        name, idx = nd.name, nd.indices
        if name == "X":
            return X(n, idx[0])
        if name == "D":
            return D(n, idx[0])
        if name == "xhat":
            return spec.xhat[idx[0]]
        if name == "M":
            return spec.M[idx]
        if name == "a":
            return const(n, ExactScalar(spec.params.a[idx[0]]))
        if name == "s":
            return const(n, ExactScalar(spec.params.s))
        if name == "i":
            return const(n, I)
        if name == "Box":
            if "Box" not in cache:
                cache["Box"] = build_box(spec)
            return cache["Box"]
        try:
            zinv, z = build_Z_pair(spec)
        except ValueError as exc:
            raise EvalError(str(exc)) from exc
        return zinv if name == "Zinv" else z

    return ev(node)
