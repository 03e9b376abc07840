"""Formula and term translations.

These are the bridges between the four equivalence problems and validity:
endmarkers embed language equivalence into match equivalence, box pairs embed
equations into formulas, the identity-splitting normal form separates the
loop part from the strictly-moving part of every term, and the three encoding
stages funnel everything onto a single successor relation, a binary tree, and
a single proposition so an alternating automaton can take over.

Generated names are deterministic: ``q$eq`` (equation embedding), ``id$a`` /
``nid$a`` (identity split of variable ``a``), ``v$P`` (term image of formula
variable ``P``), ``S$`` (successor), ``lbl$a`` (letter marker), ``D$`` (first
child marker), ``B$`` (the single surviving proposition).
"""

from __future__ import annotations

from .errors import FragmentError
from .syntax import (
    FALSE, ONE, TRUE, ZERO,
    And, Antidomain, Box, CapId, CapNid, Diamond, Expr, Formula, FalseF,
    Iff, Implies, Not, Or, PVar, Plus, Seq, Star, Term, Test, Union, Var,
    and_all, classify_fragment, domain, fragment_le, Fragment,
    free_variables, iterate, or_all, size, substitute, sum_terms,
)

__all__ = [
    "endmarker", "equation_to_formula", "formula_to_term", "normal_form",
    "remove_identity", "single_letter_encoding", "binary_tree_encoding",
    "single_proposition_encoding",
    "SUCCESSOR", "DOWN_MARKER", "SINGLE_PROP", "EQ_VAR",
]

SUCCESSOR = "S$"
DOWN_MARKER = "D$"
SINGLE_PROP = "B$"
EQ_VAR = "q$eq"


def _require(e: Expr, frag: Fragment, what: str):
    actual = classify_fragment(e)
    if not fragment_le(actual, frag):
        raise FragmentError(f"{what} needs a {frag.value} expression, got {actual.value}")


def endmarker(s: Term, t: Term, subst_closed: bool) -> tuple[Term, Term]:
    """Append the end-of-string marker to both terms: the marker asserts that
    no alphabet letter (strictly moving letter, in the substitution-closed
    variant) can be read."""
    _require(s, Fragment.REWLAPLUS, "endmarker")
    _require(t, Fragment.REWLAPLUS, "endmarker")
    svars = sorted(free_variables(s)[0] | free_variables(t)[0])
    if subst_closed:
        mark = Antidomain(sum_terms(CapNid(Var(a)) for a in svars))
    else:
        mark = Antidomain(sum_terms(Var(a) for a in svars))
    return Seq(s, mark), Seq(t, mark)


def _fresh(base: str, taken) -> str:
    if base not in taken:
        return base
    k = 2
    while f"{base}_{k}" in taken:
        k += 1
    return f"{base}_{k}"


def equation_to_formula(s: Term, t: Term) -> Formula:
    """The equation s = t as the formula [s]q <-> [t]q for a fresh q."""
    taken = free_variables(s)[1] | free_variables(t)[1]
    q = PVar(_fresh(EQ_VAR, taken))
    return Iff(Box(s, q), Box(t, q))


def formula_to_term(f: Formula) -> Term:
    """Translate a formula to a term that denotes the identity relation
    exactly where the formula holds; validity of f on finite linear orders
    becomes the equation tr(f) = 1."""
    cache: dict[int, Term] = {}

    def go(e):
        hit = cache.get(id(e))
        if hit is not None:
            return hit
        if isinstance(e, PVar):
            out = domain(Var(f"v${e.name}"))
        elif isinstance(e, FalseF):
            out = ZERO
        elif isinstance(e, Implies):
            out = Union(Antidomain(go(e.left)), go(e.right))
        elif isinstance(e, Box):
            out = Antidomain(Seq(go(e.term), Antidomain(go(e.fml))))
        elif isinstance(e, Var):
            out = e
        elif isinstance(e, Seq):
            out = Seq(go(e.left), go(e.right))
        elif isinstance(e, Union):
            out = Union(go(e.left), go(e.right))
        elif isinstance(e, Plus):
            out = Plus(go(e.arg))
        elif isinstance(e, Star):
            out = Star(go(e.arg))
        elif isinstance(e, Antidomain):
            out = Antidomain(go(e.arg))
        elif isinstance(e, CapId):
            out = CapId(go(e.arg))
        elif isinstance(e, CapNid):
            out = CapNid(go(e.arg))
        elif isinstance(e, Test):
            out = go(e.fml)
        else:
            raise TypeError(f"not an expression: {e!r}")
        cache[id(e)] = out
        return out

    return go(f)


class _NormalForm:
    """The identity split: loop(t) is a formula holding where t has a loop,
    strict(t) a term for the strictly moving part of t.  ``variable_loop``
    is the clause for bare variables; the word-structure variant replaces
    it by F (letters never loop there)."""

    def __init__(self, variable_loop):
        self.variable_loop = variable_loop
        self.fml_cache: dict[int, Formula] = {}
        self.term_cache: dict[int, tuple[Formula, Term]] = {}

    def formula(self, f: Formula) -> Formula:
        hit = self.fml_cache.get(id(f))
        if hit is not None:
            return hit
        if isinstance(f, (PVar, FalseF)):
            out = f
        elif isinstance(f, Implies):
            out = Implies(self.formula(f.left), self.formula(f.right))
        elif isinstance(f, Box):
            loop, strict = self.term(f.term)
            body = self.formula(f.fml)
            out = And(Implies(loop, body), Box(strict, body))
        else:
            raise TypeError(f"not a formula: {f!r}")
        self.fml_cache[id(f)] = out
        return out

    def term(self, t: Term) -> tuple[Formula, Term]:
        hit = self.term_cache.get(id(t))
        if hit is not None:
            return hit
        if isinstance(t, Var):
            out = (self.variable_loop(t.name), CapNid(t))
        elif isinstance(t, Seq):
            l1, l2 = self.term(t.left)
            r1, r2 = self.term(t.right)
            out = (And(l1, r1),
                   Union(Union(Seq(l2, Test(r1)), Seq(Test(l1), r2)), Seq(l2, r2)))
        elif isinstance(t, Union):
            l1, l2 = self.term(t.left)
            r1, r2 = self.term(t.right)
            # loop part of a union is a disjunction (the displayed conjunction
            # in the source material contradicts its own union axiom)
            out = (Or(l1, r1), Union(l2, r2))
        elif isinstance(t, Plus):
            a1, a2 = self.term(t.arg)
            out = (a1, Plus(a2))
        elif isinstance(t, Star):
            # t* = 1 + t^+: the loop part always holds, the strict part is
            # the strict part of t^+
            a1, a2 = self.term(t.arg)
            out = (TRUE, Plus(a2))
        elif isinstance(t, Antidomain):
            a1, a2 = self.term(t.arg)
            out = (And(Not(a1), Box(a2, FALSE)), ZERO)
        elif isinstance(t, CapId):
            a1, _ = self.term(t.arg)
            out = (a1, ZERO)
        elif isinstance(t, CapNid):
            _, a2 = self.term(t.arg)
            out = (FALSE, a2)
        elif isinstance(t, Test):
            out = (self.formula(t.fml), ZERO)
        else:
            raise TypeError(f"not a term: {t!r}")
        self.term_cache[id(t)] = out
        return out


def _default_variable_loop(name: str) -> Formula:
    return Diamond(CapId(Var(name)), TRUE)


def normal_form(e: Expr):
    """Formulas map to their identity-split normal form; terms map to the
    pair (loop part, strictly moving part).  In the output, restriction
    operators are applied to variables only and no lookahead remains."""
    nf = _NormalForm(_default_variable_loop)
    if isinstance(e, Formula):
        return nf.formula(e)
    return nf.term(e)


def remove_identity(f: Formula, word_letters: bool = False) -> Formula:
    """Normal form followed by the renaming that makes the result a plain
    dynamic-logic formula over fresh variables: the loop observer of ``a``
    becomes the formula variable ``id$a``, the strict part of ``a`` the term
    variable ``nid$a``.  With word_letters=True, letter loops are impossible
    and the loop observer is F outright."""
    if word_letters:
        nf = _NormalForm(lambda name: FALSE)
    else:
        nf = _NormalForm(lambda name: PVar(f"id${name}"))
    strict_names = {name: Var(f"nid${name}") for name in free_variables(f)[0]}
    return _rename_strict(nf.formula(f), strict_names)


def _rename_strict(f: Formula, strict_names: dict[str, Var]) -> Formula:
    """Replace each CapNid(Var a) by the fresh variable nid$a."""
    cache: dict[int, Expr] = {}

    def go(e):
        hit = cache.get(id(e))
        if hit is not None:
            return hit
        if isinstance(e, CapNid) and isinstance(e.arg, Var) and e.arg.name in strict_names:
            out = strict_names[e.arg.name]
        elif isinstance(e, (Var, PVar, FalseF)):
            out = e
        elif isinstance(e, Seq):
            out = Seq(go(e.left), go(e.right))
        elif isinstance(e, Union):
            out = Union(go(e.left), go(e.right))
        elif isinstance(e, Plus):
            out = Plus(go(e.arg))
        elif isinstance(e, Star):
            out = Star(go(e.arg))
        elif isinstance(e, Antidomain):
            out = Antidomain(go(e.arg))
        elif isinstance(e, CapId):
            out = CapId(go(e.arg))
        elif isinstance(e, CapNid):
            out = CapNid(go(e.arg))
        elif isinstance(e, Test):
            out = Test(go(e.fml))
        elif isinstance(e, Implies):
            out = Implies(go(e.left), go(e.right))
        elif isinstance(e, Box):
            out = Box(go(e.term), go(e.fml))
        else:
            raise TypeError(f"not an expression: {e!r}")
        cache[id(e)] = out
        return out

    return go(f)


def single_letter_encoding(f: Formula) -> tuple[Formula, Formula]:
    """Replace every letter ``a`` by a successor step into an ``lbl$a``
    position; the side condition forces every reachable position to carry
    exactly one letter marker."""
    letters = sorted(free_variables(f)[0])
    succ = Var(SUCCESSOR)
    theta = {a: Seq(succ, Test(PVar(f"lbl${a}"))) for a in letters}
    encoded = substitute(f, theta=theta)
    marks = [PVar(f"lbl${a}") for a in letters]
    clauses = [or_all(marks)]
    for i in range(len(letters)):
        for j in range(i + 1, len(letters)):
            clauses.append(Or(Not(marks[i]), Not(marks[j])))
    side = Box(Plus(succ), and_all(clauses))
    return encoded, side


def binary_tree_encoding(f: Formula) -> Formula:
    """Binary-tree encoding of arbitrary branching: a successor step becomes
    a step to the first child followed by any number of sibling steps; D$
    marks first children.  The [S$]D$ conjunct pins the marker."""
    succ = Var(SUCCESSOR)
    down = PVar(DOWN_MARKER)
    encoded_step = Seq(Seq(succ, Test(down)), Star(Seq(succ, Test(Not(down)))))
    return And(substitute(f, theta={SUCCESSOR: encoded_step}),
               Box(succ, down))


def single_proposition_encoding(f: Formula) -> Formula:
    """Unary encoding of formula variables: with variables p0..p(n-1) in
    lexicographic order, p_i becomes a B$ mark i steps ahead and each
    successor step stretches to n steps."""
    props = sorted(free_variables(f)[1])
    n = len(props)
    if n == 0:
        return f
    succ = Var(SUCCESSOR)
    sigma = {p: Diamond(iterate(succ, i), PVar(SINGLE_PROP))
             for i, p in enumerate(props)}
    return substitute(f, theta={SUCCESSOR: iterate(succ, n)}, sigma=sigma)
