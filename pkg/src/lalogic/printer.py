"""Rendering expressions back to concrete syntax.

The output always reparses to the identical AST.  Derived shapes (T, !, &&,
diamond, ^d, 0, 1) are detected and printed as their sugar, which is safe
because the sugar expands back to the same primitive tree.
"""

from __future__ import annotations

from .syntax import (
    FALSE, TRUE,
    Antidomain, Box, CapId, CapNid, Expr, FalseF, Formula, Implies,
    PVar, Plus, Seq, Star, Term, Test, Union, Var,
)

__all__ = ["render_expression", "render_term", "render_formula"]


def _match_not(f):
    if isinstance(f, Implies) and f.right == FALSE:
        return f.left
    return None


def _match_and(f):
    # And(a, b) == Not(Implies(Not(Not(a)), Not(b)))
    inner = _match_not(f)
    if inner is None or not isinstance(inner, Implies):
        return None
    left_nn = _match_not(inner.left)
    if left_nn is None:
        return None
    left = _match_not(left_nn)
    right = _match_not(inner.right)
    if left is not None and right is not None:
        return left, right
    return None


def _match_diamond(f):
    inner = _match_not(f)
    if inner is None or not isinstance(inner, Box):
        return None
    body = _match_not(inner.fml)
    if body is None:
        return None
    return inner.term, body


def render_term(t: Term, level: int = 0) -> str:
    """level: 0 union, 1 seq, 2 postfix (atoms never need parens)."""
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Test):
        if t.fml == TRUE:
            return "1"
        if t.fml == FALSE:
            return "0"
        return f"?({render_formula(t.fml)})"
    if isinstance(t, Union):
        s = f"{render_term(t.left, 0)} + {render_term(t.right, 1)}"
        return f"({s})" if level > 0 else s
    if isinstance(t, Seq):
        s = f"{render_term(t.left, 1)} ; {render_term(t.right, 2)}"
        return f"({s})" if level > 1 else s
    if isinstance(t, Antidomain) and isinstance(t.arg, Antidomain):
        return f"{render_term(t.arg.arg, 2)}^d"
    suffix = {Plus: "^+", Star: "*", Antidomain: "^a", CapId: "^=", CapNid: "^#"}
    for cls, op in suffix.items():
        if isinstance(t, cls):
            return f"{render_term(t.arg, 2)}{op}"
    raise TypeError(f"not a term: {t!r}")


def render_formula(f: Formula, level: int = 0) -> str:
    """level: 0 implication, 1 or, 2 and, 3 unary/atom."""
    if f == TRUE:
        return "T"
    if isinstance(f, FalseF):
        return "F"
    if isinstance(f, PVar):
        return f.name
    both = _match_and(f)
    if both is not None:
        s = f"{render_formula(both[0], 2)} && {render_formula(both[1], 3)}"
        return f"({s})" if level > 2 else s
    dia = _match_diamond(f)
    if dia is not None:
        return f"<{render_term(dia[0], 0)}>{render_formula(dia[1], 3)}"
    neg = _match_not(f)
    if neg is not None:
        return f"!{render_formula(neg, 3)}"
    if isinstance(f, Implies):
        s = f"{render_formula(f.left, 1)} -> {render_formula(f.right, 0)}"
        return f"({s})" if level > 0 else s
    if isinstance(f, Box):
        return f"[{render_term(f.term, 0)}]{render_formula(f.fml, 3)}"
    raise TypeError(f"not a formula: {f!r}")


def render_expression(e: Expr) -> str:
    if isinstance(e, Term):
        return render_term(e)
    if isinstance(e, Formula):
        return render_formula(e)
    raise TypeError(f"not an expression: {e!r}")
