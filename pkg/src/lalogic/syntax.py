"""Abstract syntax for lookahead regular expressions and their dynamic logic.

Terms and formulas are mutually recursive immutable trees.  ``0`` and ``1``
are not nodes of their own: they are ``Test(FALSE)`` and ``Test(TRUE)``.
Kleene star is a primitive node even though ``t* = 1 + t^+``; the proof
checker normalizes it away, the automata keep it.

Nodes are frozen, hash-consing-friendly (hashes are cached per node), and may
share subtrees freely; all functions here are pure.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

__all__ = [
    "Expr", "Term", "Formula",
    "Var", "Seq", "Union", "Plus", "Star", "Antidomain", "CapId", "CapNid", "Test",
    "PVar", "Implies", "FalseF", "Box",
    "FALSE", "TRUE", "ONE", "ZERO",
    "Not", "And", "Or", "Iff", "Diamond", "domain", "iterate", "sum_terms", "and_all", "or_all",
    "Fragment", "fragment_le", "classify_fragment",
    "size", "subexpressions", "free_variables", "substitute", "is_generated_name",
]


class Expr:
    """Base class for terms and formulas."""

    _fields: tuple[str, ...] = ()

    def __hash__(self):
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((self.__class__.__name__,)
                     + tuple(getattr(self, f) for f in self._fields))
            object.__setattr__(self, "_h", h)
        return h

    def __eq__(self, other):
        if self is other:
            return True
        if self.__class__ is not other.__class__:
            return False
        if hash(self) != hash(other):
            return False
        return all(getattr(self, f) == getattr(other, f) for f in self._fields)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        from .printer import render_expression
        return f"{self.__class__.__name__}<{render_expression(self)}>"


class Term(Expr):
    pass


class Formula(Expr):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class Var(Term):
    name: str
    _fields = ("name",)


@dataclass(frozen=True, eq=False, repr=False)
class Seq(Term):
    left: Term
    right: Term
    _fields = ("left", "right")


@dataclass(frozen=True, eq=False, repr=False)
class Union(Term):
    left: Term
    right: Term
    _fields = ("left", "right")


@dataclass(frozen=True, eq=False, repr=False)
class Plus(Term):
    arg: Term
    _fields = ("arg",)


@dataclass(frozen=True, eq=False, repr=False)
class Star(Term):
    arg: Term
    _fields = ("arg",)


@dataclass(frozen=True, eq=False, repr=False)
class Antidomain(Term):
    arg: Term
    _fields = ("arg",)


@dataclass(frozen=True, eq=False, repr=False)
class CapId(Term):
    arg: Term
    _fields = ("arg",)


@dataclass(frozen=True, eq=False, repr=False)
class CapNid(Term):
    arg: Term
    _fields = ("arg",)


@dataclass(frozen=True, eq=False, repr=False)
class Test(Term):
    fml: "Formula"
    _fields = ("fml",)


@dataclass(frozen=True, eq=False, repr=False)
class PVar(Formula):
    name: str
    _fields = ("name",)


@dataclass(frozen=True, eq=False, repr=False)
class Implies(Formula):
    left: Formula
    right: Formula
    _fields = ("left", "right")


@dataclass(frozen=True, eq=False, repr=False)
class FalseF(Formula):
    _fields = ()


@dataclass(frozen=True, eq=False, repr=False)
class Box(Formula):
    term: Term
    fml: Formula
    _fields = ("term", "fml")


FALSE = FalseF()
TRUE = Implies(FALSE, FALSE)
ONE = Test(TRUE)
ZERO = Test(FALSE)


def Not(f: Formula) -> Formula:
    return Implies(f, FALSE)


def Or(f: Formula, g: Formula) -> Formula:
    return Implies(Not(f), g)


def And(f: Formula, g: Formula) -> Formula:
    return Not(Or(Not(f), Not(g)))


def Iff(f: Formula, g: Formula) -> Formula:
    return And(Implies(f, g), Implies(g, f))


def Diamond(t: Term, f: Formula) -> Formula:
    return Not(Box(t, Not(f)))


def domain(t: Term) -> Term:
    """Positive lookahead ``t^d := (t^a)^a``."""
    return Antidomain(Antidomain(t))


def iterate(t: Term, n: int) -> Term:
    """n-fold composition; ``t^0 = 1``, ``t^1 = t``, ``t^n = t;...;t``."""
    if n < 0:
        raise ValueError("negative iteration")
    if n == 0:
        return ONE
    out = t
    for _ in range(n - 1):
        out = Seq(out, t)
    return out


def sum_terms(ts) -> Term:
    """Left-folded union; the empty sum is ``0``."""
    ts = list(ts)
    if not ts:
        return ZERO
    out = ts[0]
    for t in ts[1:]:
        out = Union(out, t)
    return out


def and_all(fs) -> Formula:
    """Left-folded conjunction; the empty conjunction is ``T``."""
    fs = list(fs)
    if not fs:
        return TRUE
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def or_all(fs) -> Formula:
    """Left-folded disjunction; the empty disjunction is ``F``."""
    fs = list(fs)
    if not fs:
        return FALSE
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def is_generated_name(name: str) -> bool:
    return "$" in name


class Fragment(enum.Enum):
    REWLA = "REwLA"
    REWLAPLUS = "REwLA+"
    PDLMINUS = "PDL-"
    PDLPLAIN = "PDL"
    PDLREWLAPLUS = "PDL_REwLA+"


# Strict sub-language pairs; PDLREWLAPLUS is the top of both chains.
_FRAGMENT_LT = {
    (Fragment.REWLA, Fragment.REWLAPLUS),
    (Fragment.REWLA, Fragment.PDLREWLAPLUS),
    (Fragment.REWLAPLUS, Fragment.PDLREWLAPLUS),
    (Fragment.PDLMINUS, Fragment.PDLPLAIN),
    (Fragment.PDLMINUS, Fragment.PDLREWLAPLUS),
    (Fragment.PDLPLAIN, Fragment.PDLREWLAPLUS),
}


def fragment_le(a: Fragment, b: Fragment) -> bool:
    return a == b or (a, b) in _FRAGMENT_LT


def _memoized(fn):
    """Memoize a unary tree-walk by node identity (shared DAGs stay linear)."""

    def wrapper(e, _cache=None):
        if _cache is None:
            _cache = {}
        key = id(e)
        hit = _cache.get(key)
        if hit is not None:
            return hit
        out = fn(e, _cache)
        _cache[key] = out
        return out

    return wrapper


@_memoized
def size(e: Expr, _cache=None) -> int:
    """AST node count, derived forms counted after expansion."""
    if isinstance(e, (Var, PVar, FalseF)):
        return 1
    if isinstance(e, (Seq, Union, Implies)):
        return 1 + size(e.left, _cache) + size(e.right, _cache)
    if isinstance(e, (Plus, Star, Antidomain, CapId, CapNid)):
        return 1 + size(e.arg, _cache)
    if isinstance(e, Test):
        return 1 + size(e.fml, _cache)
    if isinstance(e, Box):
        return 1 + size(e.term, _cache) + size(e.fml, _cache)
    raise TypeError(f"not an expression: {e!r}")


def subexpressions(e: Expr):
    """All subexpressions of e (including e), deduplicated, preorder-ish."""
    seen = set()
    out = []
    stack = [e]
    while stack:
        x = stack.pop()
        if x in seen:
            continue
        seen.add(x)
        out.append(x)
        if isinstance(x, (Seq, Union, Implies)):
            stack.extend((x.right, x.left))
        elif isinstance(x, (Plus, Star, Antidomain, CapId, CapNid)):
            stack.append(x.arg)
        elif isinstance(x, Test):
            stack.append(x.fml)
        elif isinstance(x, Box):
            stack.extend((x.fml, x.term))
    return out


def free_variables(e: Expr) -> tuple[frozenset[str], frozenset[str]]:
    """The term variables and formula variables occurring in e."""
    tvars, fvars = set(), set()
    for x in subexpressions(e):
        if isinstance(x, Var):
            tvars.add(x.name)
        elif isinstance(x, PVar):
            fvars.add(x.name)
    return frozenset(tvars), frozenset(fvars)


def substitute(e: Expr, theta: dict[str, Term] | None = None,
               sigma: dict[str, Formula] | None = None) -> Expr:
    """Simultaneous replacement of term variables (theta) and formula
    variables (sigma).  There are no binders, so this is plain replacement."""
    theta = theta or {}
    sigma = sigma or {}
    cache: dict[int, Expr] = {}

    def go(x):
        hit = cache.get(id(x))
        if hit is not None:
            return hit
        if isinstance(x, Var):
            out = theta.get(x.name, x)
        elif isinstance(x, PVar):
            out = sigma.get(x.name, x)
        elif isinstance(x, FalseF):
            out = x
        elif isinstance(x, Seq):
            out = Seq(go(x.left), go(x.right))
        elif isinstance(x, Union):
            out = Union(go(x.left), go(x.right))
        elif isinstance(x, Plus):
            out = Plus(go(x.arg))
        elif isinstance(x, Star):
            out = Star(go(x.arg))
        elif isinstance(x, Antidomain):
            out = Antidomain(go(x.arg))
        elif isinstance(x, CapId):
            out = CapId(go(x.arg))
        elif isinstance(x, CapNid):
            out = CapNid(go(x.arg))
        elif isinstance(x, Test):
            out = Test(go(x.fml))
        elif isinstance(x, Implies):
            out = Implies(go(x.left), go(x.right))
        elif isinstance(x, Box):
            out = Box(go(x.term), go(x.fml))
        else:
            raise TypeError(f"not an expression: {x!r}")
        cache[id(x)] = out
        return out

    return go(e)


def _is_rewla_term(t: Term, extended: bool, cache: dict) -> bool:
    key = (id(t), extended)
    hit = cache.get(key)
    if hit is not None:
        return hit
    if isinstance(t, Var):
        out = True
    elif isinstance(t, (Seq, Union)):
        out = (_is_rewla_term(t.left, extended, cache)
               and _is_rewla_term(t.right, extended, cache))
    elif isinstance(t, (Plus, Star, Antidomain)):
        out = _is_rewla_term(t.arg, extended, cache)
    elif isinstance(t, (CapId, CapNid)):
        out = extended and _is_rewla_term(t.arg, extended, cache)
    elif isinstance(t, Test):
        out = t.fml == TRUE or t.fml == FALSE
    else:
        out = False
    cache[key] = out
    return out


def _is_pdlminus(e: Expr, cache: dict) -> bool:
    # Tests are allowed only in the guarded positions f?;t and t;f?.
    key = id(e)
    hit = cache.get(key)
    if hit is not None:
        return hit
    if isinstance(e, (PVar, FalseF, Var)):
        out = True
    elif isinstance(e, Implies):
        out = _is_pdlminus(e.left, cache) and _is_pdlminus(e.right, cache)
    elif isinstance(e, Box):
        out = _is_pdlminus(e.term, cache) and _is_pdlminus(e.fml, cache)
    elif isinstance(e, Seq):
        left_test = isinstance(e.left, Test)
        right_test = isinstance(e.right, Test)
        if left_test and right_test:
            out = False
        elif left_test:
            out = _is_pdlminus(e.left.fml, cache) and _is_pdlminus(e.right, cache)
        elif right_test:
            out = _is_pdlminus(e.left, cache) and _is_pdlminus(e.right.fml, cache)
        else:
            out = _is_pdlminus(e.left, cache) and _is_pdlminus(e.right, cache)
    elif isinstance(e, Union):
        out = _is_pdlminus(e.left, cache) and _is_pdlminus(e.right, cache)
    elif isinstance(e, Plus):
        out = _is_pdlminus(e.arg, cache)
    else:
        out = False
    cache[key] = out
    return out


def _is_pdlplain(e: Expr, cache: dict) -> bool:
    key = id(e)
    hit = cache.get(key)
    if hit is not None:
        return hit
    if isinstance(e, (PVar, FalseF, Var)):
        out = True
    elif isinstance(e, (Implies, Seq, Union)):
        out = _is_pdlplain(e.left, cache) and _is_pdlplain(e.right, cache)
    elif isinstance(e, Box):
        out = _is_pdlplain(e.term, cache) and _is_pdlplain(e.fml, cache)
    elif isinstance(e, (Plus, Star)):
        out = _is_pdlplain(e.arg, cache)
    elif isinstance(e, Test):
        out = _is_pdlplain(e.fml, cache)
    else:
        out = False
    cache[key] = out
    return out


def classify_fragment(e: Expr) -> Fragment:
    """Smallest fragment containing e.  Terms are tried against the
    expression chain REwLA < REwLA+ first, then the program chain
    PDL- < PDL; formulas only against the latter."""
    if isinstance(e, Term):
        cache: dict = {}
        if _is_rewla_term(e, False, cache):
            return Fragment.REWLA
        if _is_rewla_term(e, True, cache):
            return Fragment.REWLAPLUS
    cache = {}
    if _is_pdlminus(e, cache):
        return Fragment.PDLMINUS
    if _is_pdlplain(e, {}):
        return Fragment.PDLPLAIN
    return Fragment.PDLREWLAPLUS
