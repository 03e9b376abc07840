"""Concrete syntax for terms and formulas.

Plain term grammar (precedence low to high):

    t ::= t '+' t | t ';' t | t POSTFIX | '?(' f ')' | VAR | '0' | '1' | '(' t ')'

juxtaposition means ';'; POSTFIX is one of ``* ^+ ^a ^d ^= ^#`` or ``^`` NAT
(``^=`` restricts to the identity, ``^#`` to its complement).  Formulas:

    f ::= f '->' f | f '||' f | f '&&' f | '!' f | 'F' | 'T'
        | '[' t ']' f | '<' t '>' f | FVAR | '(' f ')'

with ``->`` right-associative and weakest.  Term variables start with a
lowercase letter, formula variables with an uppercase one; ``$`` is reserved
for machine-generated names and rejected unless ``allow_generated`` is set.

Regex-sugar mode (terms only) accepts ``(?!t)``, ``(?=t)``, ``|`` for union,
postfix ``*`` and ``+``, and single-character atoms as term variables.
"""

from __future__ import annotations

from .errors import ParseError
from .syntax import (
    FALSE, ONE, TRUE, ZERO,
    Antidomain, Box, CapId, CapNid, Diamond, Expr, Formula, Implies, Not,
    And, Or, PVar, Plus, Seq, Star, Term, Test, Union, Var, domain, iterate,
)

__all__ = ["parse_expression", "parse_term", "parse_formula"]

_SYMBOLS = ("->", "||", "&&", "?(", "+", ";", "*", "(", ")", "[", "]",
            "<", ">", "!", "^", "=", "#")


def _tokenize(text: str, allow_generated: bool):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isalpha():
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] in "_$"):
                j += 1
            name = text[i:j]
            if "$" in name and not allow_generated:
                raise ParseError(f"reserved '$' in identifier {name!r}", i)
            tokens.append(("name", name, i))
            i = j
            continue
        if c.isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("nat", text[i:j], i))
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(("sym", sym, i))
                i += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, allow_generated: bool):
        self.text = text
        self.tokens = _tokenize(text, allow_generated)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value: str):
        kind, val, at = self.next()
        if val != value:
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", at)

    def fail(self, message):
        raise ParseError(message, self.peek()[2])

    # -- terms -------------------------------------------------------------

    def term(self) -> Term:
        t = self.seq()
        while self.peek()[1] == "+":
            self.next()
            t = Union(t, self.seq())
        return t

    def seq(self) -> Term:
        t = self.postfix_term()
        while True:
            kind, val, _ = self.peek()
            if val == ";":
                self.next()
                t = Seq(t, self.postfix_term())
            elif self._starts_term_atom(kind, val):
                t = Seq(t, self.postfix_term())
            else:
                return t

    @staticmethod
    def _starts_term_atom(kind, val):
        if kind == "name":
            return val[0].islower()
        return val in ("(", "?(") or val in ("0", "1") or (kind == "nat" and val in ("0", "1"))

    def postfix_term(self) -> Term:
        t = self.term_atom()
        while True:
            kind, val, at = self.peek()
            if val == "*":
                self.next()
                t = Star(t)
            elif val == "^":
                self.next()
                kind, val, at = self.next()
                if val == "+":
                    t = Plus(t)
                elif val == "a":
                    t = Antidomain(t)
                elif val == "d":
                    t = domain(t)
                elif val == "=":
                    t = CapId(t)
                elif val == "#":
                    t = CapNid(t)
                elif kind == "nat":
                    t = iterate(t, int(val))
                else:
                    raise ParseError(f"unknown postfix operator ^{val}", at)
            else:
                return t

    def term_atom(self) -> Term:
        kind, val, at = self.next()
        if kind == "nat" and val == "0":
            return ZERO
        if kind == "nat" and val == "1":
            return ONE
        if kind == "name":
            if not val[0].islower():
                raise ParseError(f"term variable must start lowercase: {val!r}", at)
            return Var(val)
        if val == "(":
            t = self.term()
            self.expect(")")
            return t
        if val == "?(":
            f = self.formula()
            self.expect(")")
            return Test(f)
        raise ParseError(f"expected a term, found {val or 'end of input'!r}", at)

    # -- formulas ----------------------------------------------------------

    def formula(self) -> Formula:
        f = self.or_formula()
        if self.peek()[1] == "->":
            self.next()
            return Implies(f, self.formula())
        return f

    def or_formula(self) -> Formula:
        f = self.and_formula()
        while self.peek()[1] == "||":
            self.next()
            f = Or(f, self.and_formula())
        return f

    def and_formula(self) -> Formula:
        f = self.unary_formula()
        while self.peek()[1] == "&&":
            self.next()
            f = And(f, self.unary_formula())
        return f

    def unary_formula(self) -> Formula:
        kind, val, at = self.peek()
        if val == "!":
            self.next()
            return Not(self.unary_formula())
        if val == "[":
            self.next()
            t = self.term()
            self.expect("]")
            return Box(t, self.unary_formula())
        if val == "<":
            self.next()
            t = self.term()
            self.expect(">")
            return Diamond(t, self.unary_formula())
        return self.formula_atom()

    def formula_atom(self) -> Formula:
        kind, val, at = self.next()
        if val == "F":
            return FALSE
        if val == "T":
            return TRUE
        if kind == "name":
            if not val[0].isupper():
                raise ParseError(f"formula variable must start uppercase: {val!r}", at)
            return PVar(val)
        if val == "(":
            f = self.formula()
            self.expect(")")
            return f
        raise ParseError(f"expected a formula, found {val or 'end of input'!r}", at)


class _RegexParser:
    """`(?!t)` is negative lookahead, `(?=t)` positive; atoms are single
    characters; `|` alternates; juxtaposition concatenates."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def fail(self, message):
        raise ParseError(message, self.pos)

    def parse(self) -> Term:
        t = self.alternation()
        if self.pos != len(self.text):
            self.fail(f"unexpected {self.peek()!r}")
        return t

    def alternation(self) -> Term:
        t = self.concat()
        while self.peek() == "|":
            self.pos += 1
            t = Union(t, self.concat())
        return t

    def concat(self) -> Term:
        parts = [self.repeat()]
        while self.peek() and self.peek() not in "|)":
            parts.append(self.repeat())
        t = parts[0]
        for p in parts[1:]:
            t = Seq(t, p)
        return t

    def repeat(self) -> Term:
        t = self.atom()
        while self.peek() in ("*", "+"):
            t = Star(t) if self.peek() == "*" else Plus(t)
            self.pos += 1
        return t

    def atom(self) -> Term:
        c = self.peek()
        if c == "(":
            if self.text.startswith("(?!", self.pos) or self.text.startswith("(?=", self.pos):
                negative = self.text[self.pos + 2] == "!"
                self.pos += 3
                t = self.alternation()
                if self.peek() != ")":
                    self.fail("unclosed lookahead group")
                self.pos += 1
                return Antidomain(t) if negative else domain(t)
            self.pos += 1
            t = self.alternation()
            if self.peek() != ")":
                self.fail("unclosed group")
            self.pos += 1
            return t
        if c == "0":
            self.pos += 1
            return ZERO
        if c == "1":
            self.pos += 1
            return ONE
        if c.isalpha() and c.islower():
            self.pos += 1
            return Var(c)
        self.fail(f"expected an atom, found {c or 'end of input'!r}")


def parse_expression(text: str, mode: str = "term", sugar: str = "plain",
                     allow_generated: bool = False) -> Expr:
    """Parse text as a term or formula; derived forms expand at parse time."""
    if mode not in ("term", "formula"):
        raise ValueError(f"mode must be 'term' or 'formula', not {mode!r}")
    if sugar not in ("plain", "regex"):
        raise ValueError(f"sugar must be 'plain' or 'regex', not {sugar!r}")
    if sugar == "regex":
        if mode != "term":
            raise ValueError("regex sugar applies to terms only")
        return _RegexParser(text.strip()).parse()
    parser = _Parser(text, allow_generated)
    out = parser.term() if mode == "term" else parser.formula()
    kind, val, at = parser.peek()
    if kind != "eof":
        raise ParseError(f"trailing input {val!r}", at)
    return out


def parse_term(text: str, sugar: str = "plain", allow_generated: bool = False) -> Term:
    return parse_expression(text, "term", sugar, allow_generated)


def parse_formula(text: str, allow_generated: bool = False) -> Formula:
    return parse_expression(text, "formula", "plain", allow_generated)
