"""Tokenizer and recursive-descent parser.

Grammar::

    ineq   := expr (REL expr)*            REL := "<=" | ">=" | "=="
    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | factor
    factor := NUMBER | NAME | NAME "(" args ")" | "(" expr ")" | "inv" "(" expr ")"
    args   := (expr ("," expr)*)?
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import OpvError, UnknownFunction
from .ast import BinOp, Call, Inv, Name, Neg, Num, Relation
from .functions import FUNCTIONS

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<rel><=|>=|==)
  | (?P<op>[-+*/(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # number, name, rel, op, eof
    text: str
    pos: int

    @property
    def end(self) -> int:
        return self.pos + len(self.text)


def _line_col(src: str, pos: int) -> tuple[int, int]:
    line = src.count("\n", 0, pos) + 1
    col = pos - (src.rfind("\n", 0, pos) + 1) + 1
    return line, col


class DslError(OpvError, ValueError):
    """Error tied to a source position (0-based ``pos``, 1-based line/col)."""

    def __init__(self, message: str, src: str = "", pos: int = 0, expected=()):
        self.pos = pos
        self.line, self.col = _line_col(src, pos) if src else (1, pos + 1)
        self.expected = frozenset(expected)
        self.message = message
        hint = f"; expected one of {sorted(self.expected)}" if self.expected else ""
        super().__init__(f"{self.line}:{self.col}: {message}{hint}")


class DslSyntaxError(DslError):
    pass


class DslUnknownFunction(DslError, UnknownFunction):
    def __str__(self):
        return DslError.__str__(self)


class ArityMismatch(DslError):
    pass


def tokenize(src: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise DslSyntaxError(f"unexpected character {src[pos]!r}", src, pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(src)))
    return tokens


_FACTOR_START = ("NUMBER", "NAME", "(", "-")


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = tokenize(src)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, expected, tok: Token | None = None):
        tok = tok or self.tok
        what = "end of input" if tok.kind == "eof" else f"{tok.text!r}"
        raise DslSyntaxError(f"unexpected {what}", self.src, tok.pos, expected)

    def expect_op(self, text: str) -> Token:
        if self.tok.kind == "op" and self.tok.text == text:
            return self.advance()
        self.error([text])

    def parse_ineq(self):
        first = self.parse_expr()
        ops, operands = [], [first]
        while self.tok.kind == "rel":
            ops.append(self.advance().text)
            operands.append(self.parse_expr())
        if self.tok.kind != "eof":
            expected = ["+", "-", "*", "/", "<=", ">=", "==", "end of input"]
            self.error(expected)
        if ops:
            return Relation(tuple(ops), tuple(operands), pos=getattr(first, "pos", 0))
        return first

    def parse_expr(self):
        left = self.parse_term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance()
            left = BinOp(op.text, left, self.parse_term(), pos=op.pos)
        return left

    def parse_term(self):
        left = self.parse_unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance()
            left = BinOp(op.text, left, self.parse_unary(), pos=op.pos)
        return left

    def parse_unary(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            op = self.advance()
            return Neg(self.parse_unary(), pos=op.pos)
        return self.parse_factor()

    def parse_factor(self):
        tok = self.tok
        if tok.kind == "number":
            self.advance()
            return Num(float(tok.text), pos=tok.pos)
        if tok.kind == "name":
            self.advance()
            if tok.text == "inv":
                self.expect_op("(")
                inner = self.parse_expr()
                self.expect_op(")")
                return Inv(inner, pos=tok.pos)
            if self.tok.kind == "op" and self.tok.text == "(":
                return self.parse_call(tok)
            return Name(tok.text, pos=tok.pos)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect_op(")")
            return inner
        self.error(_FACTOR_START)

    def parse_call(self, name: Token):
        if name.text not in FUNCTIONS:
            raise DslUnknownFunction(f"unknown function {name.text!r}", self.src, name.pos)
        self.expect_op("(")
        args = []
        if not (self.tok.kind == "op" and self.tok.text == ")"):
            args.append(self.parse_expr())
            while self.tok.kind == "op" and self.tok.text == ",":
                self.advance()
                args.append(self.parse_expr())
        if not (self.tok.kind == "op" and self.tok.text == ")"):
            self.error([",", ")", "+", "-", "*", "/"])
        close = self.tok
        arity = FUNCTIONS[name.text].arity
        if len(args) != arity:
            raise ArityMismatch(
                f"{name.text} takes {arity} argument(s), got {len(args)}", self.src, close.pos
            )
        self.advance()
        return Call(name.text, tuple(args), pos=name.pos)


def parse(src: str):
    """Parse an expression or a relation chain into a tree."""
    return _Parser(src).parse_ineq()


def parse_expr(src: str):
    """Parse text that must not contain a relation."""
    node = parse(src)
    if isinstance(node, Relation):
        raise DslSyntaxError("relation not allowed here", src, node.pos)
    return node
