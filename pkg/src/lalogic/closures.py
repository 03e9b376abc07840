"""Subformula closures driving atoms and automaton state spaces.

``fl_closure`` is the closure for the identity-free fragment (plus-primitive,
guarded tests); ``star_closure`` is the star-primitive closure used by the
automaton construction, optionally extended with the restriction/falsum
variants of every boxed member.  Both are computed by the recursive
characterizations, which give the |cl| <= 2|f| and |clexex| <= 6|f| bounds.
"""

from __future__ import annotations

from .errors import FragmentError
from .syntax import (
    FALSE, Antidomain, Box, CapId, CapNid, FalseF, Formula, Implies,
    PVar, Plus, Seq, Star, Term, Test, Union, Var,
    classify_fragment, fragment_le, Fragment,
)

__all__ = ["fl_closure", "star_closure"]


def fl_closure(f: Formula) -> frozenset[Formula]:
    """Fischer-Ladner closure of an identity-free formula (guarded tests,
    Kleene plus primitive)."""
    if not fragment_le(classify_fragment(f), Fragment.PDLMINUS):
        raise FragmentError("fl_closure needs an identity-free formula with guarded tests")
    out: set[Formula] = set()
    _cl2(f, out, set())
    return frozenset(out)


def _cl2(f: Formula, out: set, seen: set):
    if f in seen:
        return
    seen.add(f)
    out.add(f)
    if isinstance(f, Implies):
        _cl2(f.left, out, seen)
        _cl2(f.right, out, seen)
    elif isinstance(f, Box):
        out.discard(f)  # clbo re-adds the box itself
        _clbo(f.term, f.fml, out, seen)
        _cl2(f.fml, out, seen)
    elif not isinstance(f, (PVar, FalseF)):
        raise TypeError(f"not a formula: {f!r}")


def _clbo(t: Term, f: Formula, out: set, seen: set):
    key = (t, f)
    if key in seen:
        return
    seen.add(key)
    out.add(Box(t, f))
    if isinstance(t, Var):
        return
    if isinstance(t, Union):
        _clbo(t.left, f, out, seen)
        _clbo(t.right, f, out, seen)
    elif isinstance(t, Plus):
        _clbo(t.arg, Box(t, f), out, seen)
    elif isinstance(t, Seq):
        if isinstance(t.left, Test):
            out.add(Implies(t.left.fml, Box(t.right, f)))
            _cl2(t.left.fml, out, seen)
            _clbo(t.right, f, out, seen)
        elif isinstance(t.right, Test):
            body = Implies(t.right.fml, f)
            out.add(body)
            _clbo(t.left, body, out, seen)
            _cl2(t.right.fml, out, seen)
        else:
            _clbo(t.left, Box(t.right, f), out, seen)
            _clbo(t.right, f, out, seen)
    else:
        raise FragmentError(f"term outside the identity-free fragment: {t!r}")


def star_closure(f: Formula, extended: bool = False) -> frozenset[Formula]:
    """Star-primitive closure of an arbitrary formula; ``extended`` adds the
    identity/strict restrictions and falsum bodies of every boxed member
    (the automaton state space)."""
    out: set[Formula] = set()
    _clex(f, out, set())
    if not extended:
        return frozenset(out)
    extra: set[Formula] = set()
    for g in out:
        if isinstance(g, Box):
            t, body = g.term, g.fml
            extra.add(Box(CapId(t), body))
            extra.add(Box(CapNid(t), body))
            extra.add(Box(t, FALSE))
            extra.add(Box(CapId(t), FALSE))
            extra.add(Box(CapNid(t), FALSE))
    return frozenset(out | extra)


def _clex(f: Formula, out: set, seen: set):
    if f in seen:
        return
    seen.add(f)
    out.add(f)
    if isinstance(f, Implies):
        _clex(f.left, out, seen)
        _clex(f.right, out, seen)
    elif isinstance(f, Box):
        out.discard(f)
        _clexbo(f.term, f.fml, out, seen)
        _clex(f.fml, out, seen)
    elif not isinstance(f, (PVar, FalseF)):
        raise TypeError(f"not a formula: {f!r}")


def _clexbo(t: Term, f: Formula, out: set, seen: set):
    key = (t, f)
    if key in seen:
        return
    seen.add(key)
    out.add(Box(t, f))
    if isinstance(t, Var):
        return
    if isinstance(t, (Union,)):
        _clexbo(t.left, f, out, seen)
        _clexbo(t.right, f, out, seen)
    elif isinstance(t, Seq):
        _clexbo(t.left, Box(t.right, f), out, seen)
        _clexbo(t.right, f, out, seen)
    elif isinstance(t, Plus):
        _clexbo(t.arg, Box(Star(t.arg), f), out, seen)
    elif isinstance(t, Star):
        _clexbo(t.arg, Box(Star(t.arg), f), out, seen)
    elif isinstance(t, (Antidomain, CapId, CapNid)):
        _clexbo(t.arg, f, out, seen)
    elif isinstance(t, Test):
        _clex(t.fml, out, seen)
    else:
        raise TypeError(f"not a term: {t!r}")
