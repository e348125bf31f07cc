"""Parser for group-word expressions.

Grammar:
    expr   := factor { factor }
    factor := atom [ "^" int ]
    atom   := ident | "[" expr "," expr "]" | "(" expr ")"
    ident  := "x1" | "x2" | "x" | "y" | "z"
    int    := ["-"] digits

Juxtaposed factors multiply left to right; "x" and "y" alias x1 and x2,
and "z" denotes the inertia generator [x2, x1].  Exponents are reduced
mod p^k; values at or beyond p^k in absolute value set a warning flag.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .magnus import GroupElement, MagnusAlgebra


class WordSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


@dataclass
class ParseResult:
    element: GroupElement
    warnings: list[str] = field(default_factory=list)


class _Parser:
    def __init__(self, text: str, algebra: MagnusAlgebra):
        self.text = text
        self.algebra = algebra
        self.pos = 0
        self.warnings: list[str] = []

    def error(self, msg: str) -> WordSyntaxError:
        return WordSyntaxError(msg, self.pos)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, ch: str):
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def parse(self) -> GroupElement:
        self.skip_ws()
        out = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            raise self.error("trailing input")
        return out

    def expr(self) -> GroupElement:
        acc = self.factor()
        while True:
            self.skip_ws()
            if self.peek() in ("", ",", ")", "]"):
                return acc
            acc = acc.mul(self.factor())

    def factor(self) -> GroupElement:
        g = self.atom()
        self.skip_ws()
        if self.peek() == "^":
            self.pos += 1
            self.skip_ws()
            e = self.integer()
            g = g.pow(e)
        return g

    def atom(self) -> GroupElement:
        self.skip_ws()
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            g = self.expr()
            self.skip_ws()
            self.expect(")")
            return g
        if ch == "[":
            self.pos += 1
            a = self.expr()
            self.skip_ws()
            self.expect(",")
            b = self.expr()
            self.skip_ws()
            self.expect("]")
            return a.commutator(b)
        if ch.isalpha():
            return self.ident()
        raise self.error("expected a generator, '[' or '('")

    def ident(self) -> GroupElement:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isalnum():
            self.pos += 1
        name = self.text[start:self.pos]
        alg = self.algebra
        if name == "x":
            return alg.generator(0)
        if name == "y":
            return alg.generator(1)
        if name == "z":
            return alg.generator(1).commutator(alg.generator(0))
        if name.startswith("x") and name[1:].isdigit():
            i = int(name[1:]) - 1
            if 0 <= i < alg.rank:
                return alg.generator(i)
        self.pos = start
        raise self.error(f"unknown generator {name!r}")

    def integer(self) -> int:
        start = self.pos
        if self.peek() == "-":
            self.pos += 1
        if not self.peek().isdigit():
            raise self.error("expected an integer")
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        value = int(self.text[start:self.pos])
        m = self.algebra.params.modulus
        if abs(value) >= m:
            self.warnings.append(f"exponent {value} reduced mod {m}")
        return value % m


def parse_word(text: str, algebra: MagnusAlgebra) -> ParseResult:
    p = _Parser(text, algebra)
    element = p.parse()
    return ParseResult(element, p.warnings)


def eval_word(text: str, algebra: MagnusAlgebra) -> GroupElement:
    return parse_word(text, algebra).element
