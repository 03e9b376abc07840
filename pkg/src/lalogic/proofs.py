"""Hilbert systems and a derivation checker.

Schemas are formulas over metavariables (``?f1`` formula, ``?t1`` term,
``?a1`` term-variable-only); matching is purely structural after stars are
normalized to ``1 + t^+`` (the systems are plus-primitive).  Two meta-axioms
exist: ``prop`` (substitution instances of propositional tautologies, checked
by truth table over abstracted atoms) and ``pdl`` (substitution instances of
formulas valid over unrestricted structures, checked by abstracting every
lookahead/restriction-headed subterm and calling the type-elimination
decider).  The derived rules (LI, TC, Mon, MP*Prop and the congruence rules)
are checker-primitive: each is validated by its local premise/conclusion
pattern, with the term-congruence premises required to use a formula
variable foreign to the terms being exchanged.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from .decide import _star_free, abstract_to_pdl, decide_validity
from .errors import ParseError
from .parser import parse_formula, parse_term
from .printer import render_formula, render_term
from .report import DecisionReport
from .syntax import (
    FALSE, TRUE,
    And, Antidomain, Box, CapId, CapNid, Diamond, Expr, FalseF, Formula,
    Iff, Implies, Not, PVar, Plus, Seq, Star, Term, Test, Union, Var,
    free_variables,
)

__all__ = [
    "Schema", "System", "SYSTEMS", "Step", "Derivation",
    "match_schema", "check_step", "check_derivation",
    "is_prop_tautology", "is_pdl_axiom_instance",
    "parse_derivation_file", "render_derivation",
]


@dataclass(frozen=True)
class Schema:
    name: str
    pattern: Formula
    distinct: tuple[tuple[str, str], ...] = ()


def _is_metavar(name: str) -> bool:
    return name.startswith("?")


def match_schema(f: Formula, schema: Schema):
    """An assignment of the schema's metavariables instantiating to f (after
    star normalization), or None."""
    f = _star_free(f)
    assignment: dict[str, Expr] = {}

    def go(pat, target):
        if isinstance(pat, Var) and _is_metavar(pat.name):
            if pat.name.startswith("?a") and not isinstance(target, Var):
                return False
            if not isinstance(target, Term):
                return False
            bound = assignment.get(pat.name)
            if bound is None:
                assignment[pat.name] = target
                return True
            return bound == target
        if isinstance(pat, PVar) and _is_metavar(pat.name):
            if not isinstance(target, Formula):
                return False
            bound = assignment.get(pat.name)
            if bound is None:
                assignment[pat.name] = target
                return True
            return bound == target
        if pat.__class__ is not target.__class__:
            return False
        if isinstance(pat, (Var, PVar)):
            return pat.name == target.name
        if isinstance(pat, FalseF):
            return True
        if isinstance(pat, (Seq, Union, Implies)):
            return go(pat.left, target.left) and go(pat.right, target.right)
        if isinstance(pat, (Plus, Star, Antidomain, CapId, CapNid)):
            return go(pat.arg, target.arg)
        if isinstance(pat, Test):
            return go(pat.fml, target.fml)
        if isinstance(pat, Box):
            return go(pat.term, target.term) and go(pat.fml, target.fml)
        raise TypeError(f"not an expression: {pat!r}")

    if not go(schema.pattern, f):
        return None
    for a, b in schema.distinct:
        if assignment.get(a) == assignment.get(b):
            return None
    return assignment


# -- the systems ---------------------------------------------------------------

_T1, _T2 = Var("?t1"), Var("?t2")
_A1, _A2 = Var("?a1"), Var("?a2")
_F1, _F2 = PVar("?f1"), PVar("?f2")


def _axioms(*schemas):
    return {s.name: s for s in schemas}


_FIG2 = _axioms(
    Schema("a", Iff(Box(Antidomain(_T1), _F1), Box(Test(Box(_T1, FALSE)), _F1))),
    Schema("capid-t", Iff(Box(CapId(_T1), _F1),
                          Box(Test(Diamond(CapId(_T1), TRUE)), _F1))),
    Schema("capid-seq", Iff(Box(CapId(Seq(_T1, _T2)), _F1),
                            Box(Seq(CapId(_T1), CapId(_T2)), _F1))),
    Schema("capid-union", Iff(Box(CapId(Union(_T1, _T2)), _F1),
                              Box(Union(CapId(_T1), CapId(_T2)), _F1))),
    Schema("capid-plus", Iff(Box(CapId(Plus(_T1)), _F1), Box(CapId(_T1), _F1))),
    Schema("capid-adom", Iff(Box(CapId(Antidomain(_T1)), _F1),
                             Box(Antidomain(_T1), _F1))),
    Schema("capid-capid", Iff(Box(CapId(CapId(_T1)), _F1), Box(CapId(_T1), _F1))),
    Schema("capid-capnid", Iff(Box(CapId(CapNid(_T1)), _F1), TRUE)),
    Schema("capid-test", Iff(Box(CapId(Test(_F2)), _F1), Box(Test(_F2), _F1))),
    Schema("capid-union-capnid", Iff(Box(_T1, _F1),
                                     Box(Union(CapId(_T1), CapNid(_T1)), _F1))),
    Schema("capnid-seq", Iff(
        Box(CapNid(Seq(_T1, _T2)), _F1),
        Box(Union(Union(Seq(CapNid(_T1), CapId(_T2)),
                        Seq(CapId(_T1), CapNid(_T2))),
                  Seq(CapNid(_T1), CapNid(_T2))), _F1))),
    Schema("capnid-union", Iff(Box(CapNid(Union(_T1, _T2)), _F1),
                               Box(Union(CapNid(_T1), CapNid(_T2)), _F1))),
    Schema("capnid-plus", Iff(Box(CapNid(Plus(_T1)), _F1),
                              Box(Plus(CapNid(_T1)), _F1))),
    Schema("capnid-adom", Iff(Box(CapNid(Antidomain(_T1)), _F1), TRUE)),
    Schema("capnid-capid", Iff(Box(CapNid(CapId(_T1)), _F1), TRUE)),
    Schema("capnid-capnid", Iff(Box(CapNid(CapNid(_T1)), _F1),
                                Box(CapNid(_T1), _F1))),
    Schema("capnid-test", Iff(Box(CapNid(Test(_F2)), _F1), TRUE)),
    Schema("lob-capnid", Implies(
        Box(Plus(CapNid(_T1)), Implies(Box(Plus(CapNid(_T1)), _F1), _F1)),
        Box(Plus(CapNid(_T1)), _F1))),
)

_FIG3 = _axioms(
    Schema("seq", Iff(Box(Seq(_T1, _T2), _F1), Box(_T1, Box(_T2, _F1)))),
    Schema("union", Iff(Box(Union(_T1, _T2), _F1),
                        And(Box(_T1, _F1), Box(_T2, _F1)))),
    Schema("plus", Iff(Box(Plus(_T1), _F1),
                       And(Box(_T1, _F1), Box(_T1, Box(Plus(_T1), _F1))))),
    Schema("plus-ind", Implies(
        And(Box(_T1, _F1), Box(Plus(_T1), Implies(_F1, Box(_T1, _F1)))),
        Box(Plus(_T1), _F1))),
    Schema("test-l", Iff(Box(Seq(Test(_F2), _T1), _F1),
                         Implies(_F2, Box(_T1, _F1)))),
    Schema("test-r", Iff(Box(Seq(_T1, Test(_F2)), _F1),
                         Box(_T1, Implies(_F2, _F1)))),
    Schema("k", Implies(Box(_T1, Implies(_F1, _F2)),
                        Implies(Box(_T1, _F1), Box(_T1, _F2)))),
    Schema("lob-plus", Implies(
        Box(Plus(_T1), Implies(Box(Plus(_T1), _F1), _F1)),
        Box(Plus(_T1), _F1))),
)

_FIG4 = _axioms(
    Schema("capid-var", Iff(Diamond(CapId(_A1), TRUE), FALSE)),
    Schema("det-1", Implies(Diamond(_A1, _F1), Box(_A1, _F1))),
    Schema("det-2", Implies(Diamond(_A1, _F1), Box(_A2, _F2)),
           distinct=(("?a1", "?a2"),)),
)

_FIG5 = _axioms(
    Schema("k", Implies(Box(_T1, Implies(_F1, _F2)),
                        Implies(Box(_T1, _F1), Box(_T1, _F2)))),
    Schema("union", Iff(Box(Union(_T1, _T2), _F1),
                        And(Box(_T1, _F1), Box(_T2, _F1)))),
    Schema("seq", Iff(Box(Seq(_T1, _T2), _F1), Box(_T1, Box(_T2, _F1)))),
    Schema("test", Iff(Box(Test(_F2), _F1), Implies(_F2, _F1))),
    Schema("plus", Iff(Box(Plus(_T1), _F1),
                       And(Box(_T1, _F1), Box(_T1, Box(Plus(_T1), _F1))))),
    Schema("plus-ind", Implies(
        And(Box(_T1, _F1), Box(Plus(_T1), Implies(_F1, Box(_T1, _F1)))),
        Box(Plus(_T1), _F1))),
)


@dataclass(frozen=True)
class System:
    name: str
    axioms: dict[str, Schema]
    pdl_meta: bool  # whether the 'pdl' meta-axiom is available


SYSTEMS = {
    "fig2": System("fig2", _FIG2, True),
    "fig2-st": System("fig2-st", {**_FIG2, **_FIG4}, True),
    "fig3": System("fig3", _FIG3, False),
    "fig3-rel": System("fig3-rel",
                       {k: v for k, v in _FIG3.items() if k != "lob-plus"}, False),
    "fig3-det": System("fig3-det",
                       {**_FIG3, "det-1": _FIG4["det-1"], "det-2": _FIG4["det-2"]},
                       False),
    "pdl": System("pdl", _FIG5, False),
}


# -- meta-axioms ----------------------------------------------------------------


def _prop_skeleton(f: Formula, atoms: dict):
    """Abstract maximal non-propositional subformulas (boxes, variables) as
    shared atoms; returns a tree of ('atom', i) / ('imp', l, r) / 'false'."""
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Implies):
        return ("imp", _prop_skeleton(f.left, atoms),
                _prop_skeleton(f.right, atoms))
    if isinstance(f, (Box, PVar)):
        if f not in atoms:
            atoms[f] = len(atoms)
        return ("atom", atoms[f])
    raise TypeError(f"not a formula: {f!r}")


def is_prop_tautology(f: Formula, atom_cap: int = 20) -> bool:
    atoms: dict = {}
    skel = _prop_skeleton(_star_free(f), atoms)
    if len(atoms) > atom_cap:
        raise ValueError(f"over {atom_cap} propositional atoms")

    def ev(node, bits):
        if node == "false":
            return False
        if node[0] == "atom":
            return bits >> node[1] & 1 == 1
        return (not ev(node[1], bits)) or ev(node[2], bits)

    return all(ev(skel, bits) for bits in range(1 << len(atoms)))


def is_pdl_axiom_instance(f: Formula) -> bool:
    """Substitution instance of a formula valid over unrestricted
    structures: abstract the lookahead parts, decide the remainder."""
    return decide_validity(abstract_to_pdl(_star_free(f)), "rel_pdl").holds


# -- derivations ----------------------------------------------------------------


@dataclass(frozen=True)
class Step:
    formula: Formula
    justification: tuple


@dataclass(frozen=True)
class Derivation:
    steps: tuple[Step, ...]


def _match_iff(f: Formula):
    """The pair (a, b) when f is the derived biconditional of a and b."""
    # Iff(a, b) == And(Implies(a, b), Implies(b, a))
    if not isinstance(f, Implies) or f.right != FALSE:
        return None
    inner = f.left
    if not isinstance(inner, Implies):
        return None
    left, right = inner.left, inner.right
    # left == Not(Not(a -> b)), right == Not(b -> a)
    if not (isinstance(left, Implies) and left.right == FALSE
            and isinstance(left.left, Implies) and left.left.right == FALSE):
        return None
    if not (isinstance(right, Implies) and right.right == FALSE):
        return None
    fwd = left.left.left
    bwd = right.left
    if not (isinstance(fwd, Implies) and isinstance(bwd, Implies)):
        return None
    if fwd.left == bwd.right and fwd.right == bwd.left:
        return fwd.left, fwd.right
    return None


def _spine(f: Formula):
    """The implication spine f = e1 -> e2 -> ... -> en (n >= 1)."""
    out = [f]
    while isinstance(out[-1], Implies):
        last = out.pop()
        out.append(last.left)
        out.append(last.right)
    return out


def _fresh_box_pair(f: Formula):
    """For term-congruence premises: f must be [t1]p <-> [t2]p with p a
    formula variable occurring in neither term; returns (t1, t2)."""
    pair = _match_iff(f)
    if pair is None:
        return None
    a, b = pair
    if not (isinstance(a, Box) and isinstance(b, Box)):
        return None
    if not (isinstance(a.fml, PVar) and a.fml == b.fml):
        return None
    p = a.fml.name
    if p in free_variables(a.term)[1] or p in free_variables(b.term)[1]:
        return None
    return a.term, b.term


def check_step(deriv: Derivation, i: int, system: System) -> bool:
    """Whether step i (0-based) is licensed in the system."""
    step = deriv.steps[i]
    f = step.formula
    just = step.justification
    kind = just[0]

    def earlier(j):
        if not 0 <= j < i:
            raise IndexError(f"premise {j + 1} is not an earlier step")
        return deriv.steps[j].formula

    if kind == "axiom":
        schema = system.axioms.get(just[1])
        return schema is not None and match_schema(f, schema) is not None
    if kind == "prop":
        return is_prop_tautology(f)
    if kind == "pdl":
        return system.pdl_meta and is_pdl_axiom_instance(f)
    if kind == "mp":
        a, b = earlier(just[1]), earlier(just[2])
        return b == Implies(a, f)
    if kind == "nec":
        a = earlier(just[1])
        return f == Box(just[2], a)
    if kind == "li":
        a = earlier(just[1])
        if not (isinstance(f, Implies) and isinstance(f.right, Box)
                and isinstance(f.right.term, Plus)):
            return False
        phi, t = f.left, f.right.term.arg
        return f.right.fml == phi and a == Implies(phi, Box(t, phi))
    if kind == "tc":
        a, b = earlier(just[1]), earlier(just[2])
        if not (isinstance(f, Implies) and isinstance(f.right, Box)
                and isinstance(f.right.term, Plus)):
            return False
        phi, t, psi = f.left, f.right.term.arg, f.right.fml
        return a == Implies(phi, Box(t, phi)) and b == Implies(phi, Box(t, psi))
    if kind == "mon":
        a, t = earlier(just[1]), just[2]
        prem = _spine(a)
        conc = _spine(f)
        if len(conc) != len(prem) or len(prem) < 2:
            return False
        return all(c == Box(t, p) for c, p in zip(conc, prem))
    if kind == "mpp":
        goal = f
        for j in reversed(just[1]):
            goal = Implies(earlier(j), goal)
        return is_prop_tautology(goal)
    if kind == "cong":
        sub = just[1]
        if sub == "imp":
            pa = _match_iff(earlier(just[2]))
            pb = _match_iff(earlier(just[3]))
            target = _match_iff(f)
            if pa is None or pb is None or target is None:
                return False
            lhs, rhs = target
            return (lhs == Implies(pa[0], pb[0]) and rhs == Implies(pa[1], pb[1]))
        if sub == "box":
            pa = _match_iff(earlier(just[2]))
            target = _match_iff(f)
            if pa is None or target is None:
                return False
            t = just[3]
            return target == (Box(t, pa[0]), Box(t, pa[1]))
        if sub == "test":
            pa = _match_iff(earlier(just[2]))
            target = _match_iff(f)
            if pa is None or target is None:
                return False
            lhs, rhs = target
            return (isinstance(lhs, Box) and isinstance(rhs, Box)
                    and lhs.fml == rhs.fml
                    and lhs.term == Test(pa[0]) and rhs.term == Test(pa[1]))
        if sub in ("seq", "union"):
            pa = _fresh_box_pair(earlier(just[2]))
            pb = _fresh_box_pair(earlier(just[3]))
            target = _match_iff(f)
            if pa is None or pb is None or target is None:
                return False
            lhs, rhs = target
            ctor = Seq if sub == "seq" else Union
            return (isinstance(lhs, Box) and isinstance(rhs, Box)
                    and lhs.fml == rhs.fml
                    and lhs.term == ctor(pa[0], pb[0])
                    and rhs.term == ctor(pa[1], pb[1]))
        if sub == "plus":
            pa = _fresh_box_pair(earlier(just[2]))
            target = _match_iff(f)
            if pa is None or target is None:
                return False
            lhs, rhs = target
            return (isinstance(lhs, Box) and isinstance(rhs, Box)
                    and lhs.fml == rhs.fml
                    and lhs.term == Plus(pa[0]) and rhs.term == Plus(pa[1]))
        return False
    raise ValueError(f"unknown justification {kind!r}")


def check_derivation(deriv: Derivation, system: System,
                     goal: Formula | None = None) -> DecisionReport:
    """Accepted iff every step is licensed and the last formula is the goal
    (stars are normalized throughout before checking)."""
    deriv = Derivation(tuple(
        Step(_star_free(s.formula),
             tuple(_star_free(x) if isinstance(x, Term) else x
                   for x in s.justification))
        for s in deriv.steps))
    if not deriv.steps:
        return DecisionReport("rejected", holds=False, detail="empty derivation")
    for i in range(len(deriv.steps)):
        try:
            ok = check_step(deriv, i, system)
        except IndexError as exc:
            return DecisionReport("rejected", holds=False,
                                  detail=f"step {i + 1}: {exc}")
        if not ok:
            just = " ".join(str(x) for x in deriv.steps[i].justification)
            return DecisionReport(
                "rejected", holds=False,
                detail=f"step {i + 1} is not licensed by '{just}'")
    if goal is not None and deriv.steps[-1].formula != _star_free(goal):
        return DecisionReport("rejected", holds=False,
                              detail="last step does not match the goal")
    return DecisionReport("accepted", holds=True,
                          stats={"steps": len(deriv.steps)})


# -- derivation files ------------------------------------------------------------

# the formula part is greedy: the separating ';' is the last one followed by
# a justification keyword (formulas and bracketed term parameters may
# themselves contain ';')
_STEP_RE = re.compile(
    r"^\s*(\d+)\s*:\s*(.*\S)\s*;\s*"
    r"((?:axiom|prop|pdl|mp|nec|mon|li|tc|mpp|cong)\b.*?)\s*$")


def _parse_just(text: str, lineno: int) -> tuple:
    term_param = None
    bracket = re.search(r"\[(.*)\]\s*$", text)
    if bracket:
        term_param = parse_term(bracket.group(1), allow_generated=True)
        text = text[:bracket.start()].strip()
    parts = text.split()
    kind = parts[0]
    try:
        if kind == "axiom":
            return ("axiom", parts[1])
        if kind in ("prop", "pdl"):
            return (kind,)
        if kind == "mp":
            return ("mp", int(parts[1]) - 1, int(parts[2]) - 1)
        if kind == "nec":
            if term_param is None:
                raise ValueError("nec needs a bracketed term")
            return ("nec", int(parts[1]) - 1, term_param)
        if kind == "mon":
            if term_param is None:
                raise ValueError("mon needs a bracketed term")
            return ("mon", int(parts[1]) - 1, term_param)
        if kind == "li":
            return ("li", int(parts[1]) - 1)
        if kind == "tc":
            return ("tc", int(parts[1]) - 1, int(parts[2]) - 1)
        if kind == "mpp":
            return ("mpp", tuple(int(p) - 1 for p in parts[1:]))
        if kind == "cong":
            sub = parts[1]
            if sub == "box":
                if term_param is None:
                    raise ValueError("cong box needs a bracketed term")
                return ("cong", "box", int(parts[2]) - 1, term_param)
            if sub in ("imp", "seq", "union"):
                return ("cong", sub, int(parts[2]) - 1, int(parts[3]) - 1)
            if sub in ("test", "plus"):
                return ("cong", sub, int(parts[2]) - 1)
            raise ValueError(f"unknown congruence kind {sub!r}")
        raise ValueError(f"unknown justification {kind!r}")
    except (IndexError, ValueError) as exc:
        raise ParseError(f"derivation line {lineno}: {exc}") from None


def parse_derivation_file(text: str) -> Derivation:
    """One step per line: ``N: <formula> ; <justification>``; ``#`` starts a
    comment; step numbers must be 1, 2, ... in order."""
    steps = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        m = _STEP_RE.match(line)
        if m is None:
            raise ParseError(f"derivation line {lineno}: expected 'N: formula ; justification'")
        number = int(m.group(1))
        if number != len(steps) + 1:
            raise ParseError(f"derivation line {lineno}: expected step {len(steps) + 1}")
        formula = parse_formula(m.group(2), allow_generated=True)
        steps.append(Step(formula, _parse_just(m.group(3), lineno)))
    return Derivation(tuple(steps))


def _render_just(just: tuple) -> str:
    kind = just[0]
    if kind == "axiom":
        return f"axiom {just[1]}"
    if kind in ("prop", "pdl"):
        return kind
    if kind == "mp":
        return f"mp {just[1] + 1} {just[2] + 1}"
    if kind == "nec":
        return f"nec {just[1] + 1} [{render_term(just[2])}]"
    if kind == "mon":
        return f"mon {just[1] + 1} [{render_term(just[2])}]"
    if kind == "li":
        return f"li {just[1] + 1}"
    if kind == "tc":
        return f"tc {just[1] + 1} {just[2] + 1}"
    if kind == "mpp":
        return "mpp " + " ".join(str(j + 1) for j in just[1])
    if kind == "cong":
        sub = just[1]
        if sub == "box":
            return f"cong box {just[2] + 1} [{render_term(just[3])}]"
        if sub in ("imp", "seq", "union"):
            return f"cong {sub} {just[2] + 1} {just[3] + 1}"
        return f"cong {sub} {just[2] + 1}"
    raise ValueError(f"unknown justification {kind!r}")


def render_derivation(deriv: Derivation) -> str:
    lines = []
    for i, step in enumerate(deriv.steps, 1):
        lines.append(f"{i}: {render_formula(step.formula)} ; {_render_just(step.justification)}")
    return "\n".join(lines) + "\n"
