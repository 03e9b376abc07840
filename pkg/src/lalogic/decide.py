"""Top-level deciders.

``decide_validity`` runs the negation through the encoding pipeline and asks
the alternating automaton for emptiness (finite linear orders use the tree
automaton, word structures the string automaton), or, for plain dynamic
logic over unrestricted structures, a Fischer-Ladner type-elimination
procedure.  ``decide_equivalence`` reduces the four equivalences of lookahead
expressions to those validity problems.

Between pipeline stages a pointwise-equivalence simplifier keeps the
intermediate formulas small; the exposed encoding operations themselves stay
literal.
"""

from __future__ import annotations

import itertools

import numpy as np

from .automata import asa_emptiness, ata_emptiness, build_asa, build_ata
from .closures import fl_closure
from .encodings import (
    binary_tree_encoding, endmarker, equation_to_formula, remove_identity,
    single_letter_encoding, single_proposition_encoding,
)
from .errors import FragmentError, StateBudgetExceeded
from .report import DecisionReport
from .semantics import (StructClass, bounded_counterexample, bounded_language,
                        eval_term, word_structure, words_upto)
from .syntax import (
    FALSE, ONE, TRUE, ZERO,
    And, Antidomain, Box, CapId, CapNid, Expr, FalseF, Formula, Fragment,
    Implies, Not, PVar, Plus, Seq, Star, Term, Test, Union, Var,
    classify_fragment, fragment_le, free_variables, size, substitute,
)

__all__ = ["decide_validity", "decide_equivalence", "abstract_to_pdl", "simplify"]


# -- the pipeline simplifier ---------------------------------------------------


def _simp_term(t: Term, cache) -> Term:
    hit = cache.get(t)
    if hit is not None:
        return hit
    out = t
    if isinstance(t, Seq):
        left, right = _simp_term(t.left, cache), _simp_term(t.right, cache)
        if left == ZERO or right == ZERO:
            out = ZERO
        elif left == ONE:
            out = right
        elif right == ONE:
            out = left
        else:
            out = Seq(left, right)
    elif isinstance(t, Union):
        left, right = _simp_term(t.left, cache), _simp_term(t.right, cache)
        if left == ZERO:
            out = right
        elif right == ZERO or left == right:
            out = left
        else:
            out = Union(left, right)
    elif isinstance(t, Plus):
        arg = _simp_term(t.arg, cache)
        out = arg if isinstance(arg, Test) else Plus(arg)
    elif isinstance(t, Star):
        arg = _simp_term(t.arg, cache)
        out = ONE if isinstance(arg, Test) else Star(arg)
    elif isinstance(t, Antidomain):
        arg = _simp_term(t.arg, cache)
        if isinstance(arg, Test):
            out = Test(_simp_fml(Not(arg.fml), cache))
        else:
            out = Antidomain(arg)
    elif isinstance(t, CapId):
        arg = _simp_term(t.arg, cache)
        if isinstance(arg, (Test, Antidomain, CapId)):
            out = arg
        elif isinstance(arg, CapNid):
            out = ZERO
        else:
            out = CapId(arg)
    elif isinstance(t, CapNid):
        arg = _simp_term(t.arg, cache)
        if isinstance(arg, (Test, Antidomain, CapId)):
            out = ZERO
        elif isinstance(arg, CapNid):
            out = arg
        else:
            out = CapNid(arg)
    elif isinstance(t, Test):
        out = Test(_simp_fml(t.fml, cache))
    cache[t] = out
    return out


def _simp_fml(f: Formula, cache) -> Formula:
    hit = cache.get(f)
    if hit is not None:
        return hit
    out = f
    if isinstance(f, Implies):
        left, right = _simp_fml(f.left, cache), _simp_fml(f.right, cache)
        if left == FALSE or right == TRUE or left == right:
            out = TRUE
        elif left == TRUE:
            out = right
        else:
            out = Implies(left, right)
    elif isinstance(f, Box):
        term = _simp_term(f.term, cache)
        body = _simp_fml(f.fml, cache)
        if body == TRUE or term == ZERO:
            out = TRUE
        elif isinstance(term, Test):
            out = _one_step(Implies(term.fml, body), cache)
        elif isinstance(term, Seq) and isinstance(term.left, Test):
            out = _one_step(Implies(term.left.fml, Box(term.right, body)), cache)
        elif isinstance(term, Seq) and isinstance(term.right, Test):
            out = _one_step(Box(term.left, Implies(term.right.fml, body)), cache)
        else:
            out = Box(term, body)
    cache[f] = out
    return out


def _one_step(f: Formula, cache) -> Formula:
    # re-simplify a freshly built node (its children are already reduced)
    return _simp_fml(f, cache)


def simplify(f: Formula) -> Formula:
    """Pointwise-equivalent reduction used between pipeline stages."""
    out = _simp_fml(f, {})
    while True:
        again = _simp_fml(out, {})
        if again == out:
            return out
        out = again


# -- abstraction into plain dynamic logic ---------------------------------------


def abstract_to_pdl(f: Formula) -> Formula:
    """Replace each maximal lookahead/restriction-headed subterm by a fresh
    term variable (identical subterms share one), left-to-right order."""
    table: dict[Term, Var] = {}

    def fresh(t: Term) -> Var:
        if t not in table:
            table[t] = Var(f"v${len(table) + 1}")
        return table[t]

    def go_term(t: Term) -> Term:
        if isinstance(t, (Antidomain, CapId, CapNid)):
            return fresh(t)
        if isinstance(t, Var):
            return t
        if isinstance(t, Seq):
            return Seq(go_term(t.left), go_term(t.right))
        if isinstance(t, Union):
            return Union(go_term(t.left), go_term(t.right))
        if isinstance(t, Plus):
            return Plus(go_term(t.arg))
        if isinstance(t, Star):
            return Star(go_term(t.arg))
        if isinstance(t, Test):
            return Test(go_fml(t.fml))
        raise TypeError(f"not a term: {t!r}")

    def go_fml(f: Formula) -> Formula:
        if isinstance(f, (PVar, FalseF)):
            return f
        if isinstance(f, Implies):
            return Implies(go_fml(f.left), go_fml(f.right))
        if isinstance(f, Box):
            return Box(go_term(f.term), go_fml(f.fml))
        raise TypeError(f"not a formula: {f!r}")

    return go_fml(f)


# -- plain dynamic logic over unrestricted structures ----------------------------


def _star_free(e: Expr):
    """Normalize the star away: t* becomes 1 + t^+."""
    if isinstance(e, (Var, PVar, FalseF)):
        return e
    if isinstance(e, Star):
        arg = _star_free(e.arg)
        return Union(ONE, Plus(arg))
    if isinstance(e, Seq):
        return Seq(_star_free(e.left), _star_free(e.right))
    if isinstance(e, Union):
        return Union(_star_free(e.left), _star_free(e.right))
    if isinstance(e, Plus):
        return Plus(_star_free(e.arg))
    if isinstance(e, Antidomain):
        return Antidomain(_star_free(e.arg))
    if isinstance(e, CapId):
        return CapId(_star_free(e.arg))
    if isinstance(e, CapNid):
        return CapNid(_star_free(e.arg))
    if isinstance(e, Test):
        return Test(_star_free(e.fml))
    if isinstance(e, Implies):
        return Implies(_star_free(e.left), _star_free(e.right))
    if isinstance(e, Box):
        return Box(_star_free(e.term), _star_free(e.fml))
    raise TypeError(f"not an expression: {e!r}")


def _pdl_closure(f: Formula) -> frozenset[Formula]:
    """Fischer-Ladner closure for plain dynamic logic with unrestricted
    tests and Kleene plus."""
    out: set[Formula] = set()

    def cl2(g, seen):
        if g in seen:
            return
        seen.add(g)
        out.add(g)
        if isinstance(g, Implies):
            cl2(g.left, seen)
            cl2(g.right, seen)
        elif isinstance(g, Box):
            clbo(g.term, g.fml, seen)
            cl2(g.fml, seen)
        elif not isinstance(g, (PVar, FalseF)):
            raise TypeError(f"not a formula: {g!r}")

    def clbo(t, g, seen):
        key = (t, g)
        if key in seen:
            return
        seen.add(key)
        out.add(Box(t, g))
        if isinstance(t, Var):
            return
        if isinstance(t, Union):
            clbo(t.left, g, seen)
            clbo(t.right, g, seen)
        elif isinstance(t, Seq):
            clbo(t.left, Box(t.right, g), seen)
            clbo(t.right, g, seen)
        elif isinstance(t, Plus):
            clbo(t.arg, Box(t, g), seen)
        elif isinstance(t, Test):
            out.add(Implies(t.fml, g))
            cl2(t.fml, seen)
        else:
            raise FragmentError(f"term outside plain dynamic logic: {t!r}")

    cl2(f, set())
    return frozenset(out)


class _TypeElimination:
    """Hintikka-set elimination deciding satisfiability of plain dynamic
    logic formulas over unrestricted structures."""

    def __init__(self, f: Formula, atom_budget: int = 1 << 13):
        self.f = f
        self.closure = sorted(_pdl_closure(f), key=_formula_key)
        self.free = [g for g in self.closure
                     if isinstance(g, PVar)
                     or (isinstance(g, Box) and isinstance(g.term, Var))]
        if 1 << len(self.free) > atom_budget:
            raise StateBudgetExceeded(
                f"type elimination would need 2^{len(self.free)} candidate sets")
        self.box_terms = sorted({g.term for g in self.closure if isinstance(g, Box)},
                                key=_formula_key)
        self.atoms = self._make_atoms()

    def _make_atoms(self):
        atoms = []
        for bits in itertools.product((False, True), repeat=len(self.free)):
            base = dict(zip(self.free, bits))
            value: dict[Formula, bool] = {}

            def ev(g):
                hit = value.get(g)
                if hit is not None:
                    return hit
                if g in base:
                    out = base[g]
                elif isinstance(g, FalseF):
                    out = False
                elif isinstance(g, PVar):
                    out = base[g]
                elif isinstance(g, Implies):
                    out = (not ev(g.left)) or ev(g.right)
                elif isinstance(g, Box):
                    t = g.term
                    if isinstance(t, Union):
                        out = ev(Box(t.left, g.fml)) and ev(Box(t.right, g.fml))
                    elif isinstance(t, Seq):
                        out = ev(Box(t.left, Box(t.right, g.fml)))
                    elif isinstance(t, Plus):
                        out = ev(Box(t.arg, g.fml)) and ev(Box(t.arg, Box(t, g.fml)))
                    elif isinstance(t, Test):
                        out = (not ev(t.fml)) or ev(g.fml)
                    else:
                        raise AssertionError(f"unexpected box term {t!r}")
                else:
                    raise AssertionError(f"unexpected formula {g!r}")
                value[g] = out
                return out

            atoms.append(frozenset(g for g in self.closure if ev(g)))
        return atoms

    def _term_matrix(self, t: Term, alive, member_col, matrices):
        hit = matrices.get(t)
        if hit is not None:
            return hit
        n = len(alive)
        if isinstance(t, Var):
            rows = np.zeros((n, n), dtype=bool)
            for i, atom in enumerate(alive):
                mask = np.ones(n, dtype=bool)
                for g in atom:
                    if isinstance(g, Box) and g.term == t:
                        mask &= member_col[g.fml]
                rows[i] = mask
            out = rows
        elif isinstance(t, Seq):
            left = self._term_matrix(t.left, alive, member_col, matrices)
            right = self._term_matrix(t.right, alive, member_col, matrices)
            out = (left.astype(np.float32) @ right.astype(np.float32)) > 0.5
        elif isinstance(t, Union):
            out = (self._term_matrix(t.left, alive, member_col, matrices)
                   | self._term_matrix(t.right, alive, member_col, matrices))
        elif isinstance(t, Plus):
            m = self._term_matrix(t.arg, alive, member_col, matrices)
            out = m.copy()
            while True:
                step = (out.astype(np.float32) @ m.astype(np.float32)) > 0.5
                grown = out | step
                if (grown == out).all():
                    break
                out = grown
        elif isinstance(t, Test):
            out = np.zeros((n, n), dtype=bool)
            diag = member_col[t.fml] if t.fml in member_col else np.array(
                [t.fml in atom for atom in alive])
            np.fill_diagonal(out, diag)
        else:
            raise AssertionError(f"unexpected term {t!r}")
        matrices[t] = out
        return out

    def satisfiable_atoms(self):
        alive = list(self.atoms)
        boxes = [g for g in self.closure if isinstance(g, Box)]
        while True:
            n = len(alive)
            if n == 0:
                return []
            member_col = {g: np.array([g in atom for atom in alive])
                          for g in self.closure}
            matrices: dict = {}
            bad = set()
            for g in boxes:
                m = self._term_matrix(g.term, alive, member_col, matrices)
                refuted = ~member_col[g.fml]
                has_witness = (m & refuted[None, :]).any(axis=1)
                for i, atom in enumerate(alive):
                    if g not in atom and not has_witness[i]:
                        bad.add(i)
            if not bad:
                return alive
            alive = [atom for i, atom in enumerate(alive) if i not in bad]


def _formula_key(e: Expr) -> str:
    from .printer import render_expression
    return render_expression(e)


_REL_PDL_CACHE: dict[Formula, bool] = {}


def _rel_pdl_valid(f: Formula, atom_budget: int = 1 << 13) -> bool:
    hit = _REL_PDL_CACHE.get(f)
    if hit is not None:
        return hit
    g = _star_free(f)
    if not fragment_le(classify_fragment(g), Fragment.PDLPLAIN):
        raise FragmentError("validity over unrestricted structures needs a plain "
                            "dynamic logic formula")
    elim = _TypeElimination(g, atom_budget)
    valid = all(g in atom for atom in elim.satisfiable_atoms())
    _REL_PDL_CACHE[f] = valid
    return valid


# -- validity ------------------------------------------------------------------


def _pipeline(neg: Formula, word_letters: bool):
    stages = {}
    g = simplify(remove_identity(neg, word_letters=word_letters))
    stages["identity_removed"] = size(g)
    encoded, side = single_letter_encoding(g)
    g = simplify(And(encoded, side))
    stages["single_letter"] = size(g)
    if not word_letters:
        g = simplify(binary_tree_encoding(g))
        stages["binary_tree"] = size(g)
    g = simplify(single_proposition_encoding(g))
    stages["single_proposition"] = size(g)
    return g, stages


def decide_validity(f: Formula, cls: str, budget: int = 2 ** 20) -> DecisionReport:
    """cls: 'finlin' (finite linear orders), 'stfinlin' (word structures) or
    'rel_pdl' (plain dynamic logic over unrestricted structures)."""
    if cls == "rel_pdl":
        valid = _rel_pdl_valid(f, atom_budget=min(budget, 1 << 13))
        return DecisionReport("valid" if valid else "invalid", holds=valid)
    if cls not in ("finlin", "stfinlin"):
        raise ValueError(f"unknown validity class {cls!r}")
    neg = Not(f)
    g, stages = _pipeline(neg, word_letters=(cls == "stfinlin"))
    if cls == "finlin":
        aut = build_ata(g)
        rep = ata_emptiness(aut, budget)
    else:
        aut = build_asa(g)
        rep = asa_emptiness(aut, budget)
    valid = rep.verdict == "empty"
    stats = rep.merged_stats(**stages)
    return DecisionReport("valid" if valid else "invalid", holds=valid,
                          witness=rep.witness, witness_kind=rep.witness_kind,
                          stats=stats)


# -- equivalence ----------------------------------------------------------------


_MODES = ("match", "lang", "subst_match", "subst_lang")


def _word_witness(s: Term, t: Term, kind: str, max_len: int):
    """First word (or match triple) distinguishing s and t, in
    length-lexicographic order."""
    alphabet = sorted(free_variables(s)[0] | free_variables(t)[0]) or ["a"]
    for word in words_upto(alphabet, max_len):
        struc = word_structure(word)
        rs, rt = eval_term(struc, s), eval_term(struc, t)
        if kind == "lang":
            full = (0, len(word))
            if (full in rs) != (full in rt):
                return word
        else:
            if rs != rt:
                return (word,) + min(rs.symmetric_difference(rt))
    return None


def decide_equivalence(mode: str, s: Term, t: Term, budget: int = 2 ** 20,
                       witness_len: int = 8) -> DecisionReport:
    """The four equivalences; on the inequivalent side of the word modes a
    distinguishing word (or match triple) is searched up to witness_len."""
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}")
    for u in (s, t):
        if not fragment_le(classify_fragment(u), Fragment.REWLAPLUS):
            raise FragmentError(
                f"equivalence needs lookahead expressions, got {classify_fragment(u).value}")
    if mode == "match":
        f = equation_to_formula(s, t)
        inner = decide_validity(f, "stfinlin", budget)
    elif mode == "lang":
        f = equation_to_formula(*endmarker(s, t, False))
        inner = decide_validity(f, "stfinlin", budget)
    elif mode == "subst_match":
        f = equation_to_formula(s, t)
        inner = decide_validity(f, "finlin", budget)
    else:
        f = equation_to_formula(*endmarker(s, t, True))
        inner = decide_validity(f, "finlin", budget)
    if inner.holds:
        return DecisionReport("equivalent", holds=True, stats=inner.stats)
    witness = None
    kind = ""
    if mode in ("match", "lang"):
        witness = _word_witness(s, t, "lang" if mode == "lang" else "match", witness_len)
        kind = "word" if mode == "lang" else "match_triple"
    else:
        found = bounded_counterexample(f, StructClass.FINLIN, 3)
        if found is not None:
            witness, kind = found, "structure_point"
    return DecisionReport("not_equivalent", holds=False, witness=witness,
                          witness_kind=kind if witness is not None else "",
                          stats=inner.stats)
