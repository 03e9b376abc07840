"""Alternating tree and string automata over single-successor formulas.

States are polarized closure formulas ``(f, 1)`` ("f holds here") and
``(f, 0)`` ("f fails here"); letters are sets of proposition names plus
down-flags saying which children exist.  Transitions are positive boolean
formulas over (direction, state) atoms, with direction 0 staying put.
Acceptance is the least fixpoint of the local satisfaction relation, so runs
are finite trees and unproductive stay-loops reject.

Emptiness works on the realizable acceptance sets: the set of states that
accept a given tree is a deterministic function of the root letter and the
children's acceptance sets, so the reachable family of such sets (kept as an
antichain of maximal elements; acceptance is monotone in the children) is a
finite fixpoint.  Witnesses are rebuilt from the discovery order and
re-checked by the run semantics.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .closures import star_closure
from .errors import StateBudgetExceeded
from .report import DecisionReport
from .semantics import GeneralizedStructure
from .syntax import (
    FALSE, Antidomain, Box, CapId, CapNid, FalseF, Formula, Implies,
    PVar, Plus, Seq, Star, Term, Test, Union, Var, free_variables,
)

__all__ = [
    "PBool", "TrueLeaf", "FalseLeaf", "Atom", "AndB", "OrB",
    "Letter", "InputTree", "AlternatingAutomaton",
    "build_ata", "build_asa", "ata_accepts", "run_states",
    "ata_emptiness", "asa_emptiness", "structure_from_tree",
    "enumerate_trees", "render_automaton", "render_tree",
]

State = tuple[Formula, int]


class PBool:
    """Positive boolean formula over (direction, state) atoms."""
    __slots__ = ()


class _TrueLeaf(PBool):
    def __repr__(self):
        return "TT"


class _FalseLeaf(PBool):
    def __repr__(self):
        return "FF"


TrueLeaf = _TrueLeaf()
FalseLeaf = _FalseLeaf()


@dataclass(frozen=True)
class Atom(PBool):
    direction: int  # 0 = stay, 1/2 = child
    state: State


@dataclass(frozen=True)
class AndB(PBool):
    left: PBool
    right: PBool


@dataclass(frozen=True)
class OrB(PBool):
    left: PBool
    right: PBool


def pand(a: PBool, b: PBool) -> PBool:
    if a is FalseLeaf or b is FalseLeaf:
        return FalseLeaf
    if a is TrueLeaf:
        return b
    if b is TrueLeaf:
        return a
    return AndB(a, b)


def por(a: PBool, b: PBool) -> PBool:
    if a is TrueLeaf or b is TrueLeaf:
        return TrueLeaf
    if a is FalseLeaf:
        return b
    if b is FalseLeaf:
        return a
    return OrB(a, b)


def const(v: bool) -> PBool:
    return TrueLeaf if v else FalseLeaf


def dual(p: PBool) -> PBool:
    if p is TrueLeaf:
        return FalseLeaf
    if p is FalseLeaf:
        return TrueLeaf
    if isinstance(p, Atom):
        f, pol = p.state
        return Atom(p.direction, (f, 1 - pol))
    if isinstance(p, AndB):
        return por(dual(p.left), dual(p.right))
    if isinstance(p, OrB):
        return pand(dual(p.left), dual(p.right))
    raise TypeError(f"not a positive boolean formula: {p!r}")


def pbool_atoms(p: PBool):
    if isinstance(p, Atom):
        yield p
    elif isinstance(p, (AndB, OrB)):
        yield from pbool_atoms(p.left)
        yield from pbool_atoms(p.right)


def eval_pbool(p: PBool, atom_true) -> bool:
    if p is TrueLeaf:
        return True
    if p is FalseLeaf:
        return False
    if isinstance(p, Atom):
        return atom_true(p)
    if isinstance(p, AndB):
        return eval_pbool(p.left, atom_true) and eval_pbool(p.right, atom_true)
    if isinstance(p, OrB):
        return eval_pbool(p.left, atom_true) or eval_pbool(p.right, atom_true)
    raise TypeError(f"not a positive boolean formula: {p!r}")


@dataclass(frozen=True)
class Letter:
    props: frozenset[str]
    flags: frozenset[int]

    def __str__(self):
        parts = sorted(self.props) + [f"{d}v" for d in sorted(self.flags)]
        return "{" + ",".join(parts) + "}"


@dataclass
class InputTree:
    """Finite letter-labelled tree; addresses are tuples over {1,2} (or {1}
    for strings), the domain always contains the root ()."""

    nodes: dict[tuple[int, ...], Letter]

    def __post_init__(self):
        if () not in self.nodes:
            raise ValueError("input tree must contain the root")

    def __eq__(self, other):
        return isinstance(other, InputTree) and self.nodes == other.nodes

    def addresses(self):
        return sorted(self.nodes, key=lambda w: (len(w), w))

    def size(self) -> int:
        return len(self.nodes)


# -- construction -------------------------------------------------------------


_MAX_PROPS = 12


@dataclass
class AlternatingAutomaton:
    states: frozenset[State]
    props: tuple[str, ...]
    directions: int  # 2 for trees, 1 for strings
    initial: State
    term_var: str
    _delta_cache: dict = field(default_factory=dict, repr=False)

    def letters(self):
        for flags in self.flag_groups():
            for k in range(len(self.props) + 1):
                for ps in itertools.combinations(self.props, k):
                    yield Letter(frozenset(ps), flags)

    def flag_groups(self):
        dirs = range(1, self.directions + 1)
        return [frozenset(c) for n in range(self.directions + 1)
                for c in itertools.combinations(dirs, n)]

    def delta(self, state: State, letter: Letter) -> PBool:
        key = (state, letter)
        hit = self._delta_cache.get(key)
        if hit is None:
            f, pol = state
            hit = self._delta1(f, letter)
            if pol == 0:
                hit = dual(hit)
            self._delta_cache[key] = hit
        return hit

    # transition function at polarity 1; polarity 0 is its dual
    def _delta1(self, f: Formula, letter: Letter) -> PBool:
        if isinstance(f, PVar):
            return const(f.name in letter.props)
        if isinstance(f, FalseF):
            return FalseLeaf
        if isinstance(f, Implies):
            return por(Atom(0, (f.left, 0)), Atom(0, (f.right, 1)))
        if isinstance(f, Box):
            t, body = f.term, f.fml
            if isinstance(t, CapId):
                return self._delta_capid(t.arg, body, letter)
            if isinstance(t, CapNid):
                return self._delta_capnid(t.arg, body, letter)
            return pand(Atom(0, (Box(CapId(t), body), 1)),
                        Atom(0, (Box(CapNid(t), body), 1)))
        raise TypeError(f"not a formula: {f!r}")

    def _delta_capid(self, u: Term, body: Formula, letter: Letter) -> PBool:
        if isinstance(u, Var):
            if u.name != self.term_var:
                raise ValueError(f"foreign term variable {u.name!r}")
            return TrueLeaf
        if isinstance(u, Seq):
            # a loop of u;v on a partial order is a u-loop and a v-loop at
            # the same point, so the box holds when u has no loop here or
            # the v-loop implies the body
            return por(Atom(0, (Box(CapId(u.left), FALSE), 1)),
                       Atom(0, (Box(CapId(u.right), body), 1)))
        if isinstance(u, Union):
            return pand(Atom(0, (Box(CapId(u.left), body), 1)),
                        Atom(0, (Box(CapId(u.right), body), 1)))
        if isinstance(u, Plus):
            return Atom(0, (Box(CapId(u.arg), body), 1))
        if isinstance(u, Star):
            return Atom(0, (body, 1))
        if isinstance(u, Antidomain):
            return por(Atom(0, (Box(u.arg, FALSE), 0)), Atom(0, (body, 1)))
        if isinstance(u, Test):
            return por(Atom(0, (u.fml, 0)), Atom(0, (body, 1)))
        if isinstance(u, CapId):
            return Atom(0, (Box(CapId(u.arg), body), 1))
        if isinstance(u, CapNid):
            return TrueLeaf
        raise TypeError(f"not a term: {u!r}")

    def _delta_capnid(self, u: Term, body: Formula, letter: Letter) -> PBool:
        if isinstance(u, Var):
            if u.name != self.term_var:
                raise ValueError(f"foreign term variable {u.name!r}")
            out = TrueLeaf
            for d in range(1, self.directions + 1):
                out = pand(out, por(const(d not in letter.flags),
                                    Atom(d, (body, 1))))
            return out
        if isinstance(u, Seq):
            return pand(
                Atom(0, (Box(CapNid(u.left), Box(u.right, body)), 1)),
                por(Atom(0, (Box(CapId(u.left), FALSE), 1)),
                    Atom(0, (Box(CapNid(u.right), body), 1))))
        if isinstance(u, Union):
            return pand(Atom(0, (Box(CapNid(u.left), body), 1)),
                        Atom(0, (Box(CapNid(u.right), body), 1)))
        if isinstance(u, (Plus, Star)):
            return Atom(0, (Box(CapNid(u.arg), Box(Star(u.arg), body)), 1))
        if isinstance(u, (Antidomain, Test, CapId)):
            return TrueLeaf
        if isinstance(u, CapNid):
            return Atom(0, (Box(CapNid(u.arg), body), 1))
        raise TypeError(f"not a term: {u!r}")


def _build(f0: Formula, directions: int, state_cap: int) -> AlternatingAutomaton:
    tvars, fvars = free_variables(f0)
    if len(tvars) > 1:
        raise ValueError(f"expected at most one term variable, got {sorted(tvars)}")
    term_var = next(iter(tvars)) if tvars else "S$"
    props = tuple(sorted(fvars))
    if len(props) > _MAX_PROPS:
        raise StateBudgetExceeded(f"alphabet over {len(props)} propositions")
    aut = AlternatingAutomaton(frozenset(), props, directions, (f0, 1), term_var)
    # close the closure-derived state set under transition references; the
    # probes with empty proposition set cover every atom the full alphabet
    # can mention (letters prune atoms, they never add new ones)
    probes = [Letter(frozenset(), flags) for flags in aut.flag_groups()]
    states = {(g, p) for g in star_closure(f0, extended=True) for p in (0, 1)}
    states.add((f0, 1))
    frontier = list(states)
    while frontier:
        q = frontier.pop()
        for probe in probes:
            for atom in pbool_atoms(aut.delta(q, probe)):
                if atom.state not in states:
                    states.add(atom.state)
                    frontier.append(atom.state)
        if len(states) > state_cap:
            raise StateBudgetExceeded(f"state space over {state_cap}")
    aut.states = frozenset(states)
    return aut


def build_ata(f0: Formula, state_cap: int = 200_000) -> AlternatingAutomaton:
    """Alternating tree automaton for a formula over one term variable."""
    return _build(f0, 2, state_cap)


def build_asa(f0: Formula, state_cap: int = 200_000) -> AlternatingAutomaton:
    """Alternating string automaton (single direction, no branching)."""
    return _build(f0, 1, state_cap)


# -- running on a concrete input ----------------------------------------------


def _partial_eval(p: PBool, child_sets) -> PBool:
    """Resolve child-direction atoms against fixed child acceptance sets,
    leaving a formula over stay-atoms only."""
    if isinstance(p, Atom):
        if p.direction == 0:
            return p
        child = child_sets[p.direction - 1]
        return const(child is not None and p.state in child)
    if isinstance(p, AndB):
        return pand(_partial_eval(p.left, child_sets),
                    _partial_eval(p.right, child_sets))
    if isinstance(p, OrB):
        return por(_partial_eval(p.left, child_sets),
                   _partial_eval(p.right, child_sets))
    return p


def _local_fixpoint(states, residual) -> set:
    """Least set closed under the stay-atom formulas, by worklist."""
    acc: set[State] = set()
    dependents: dict[State, list[State]] = {}
    queue = []
    for q in states:
        r = residual[q]
        if r is TrueLeaf:
            acc.add(q)
            queue.append(q)
        elif r is not FalseLeaf:
            for atom in pbool_atoms(r):
                dependents.setdefault(atom.state, []).append(q)
    in_acc = acc.__contains__

    def atom_true(atom):
        return in_acc(atom.state)

    while queue:
        trigger = queue.pop()
        for q in dependents.get(trigger, ()):
            if q not in acc and eval_pbool(residual[q], atom_true):
                acc.add(q)
                queue.append(q)
    return acc


def run_states(aut: AlternatingAutomaton, tree: InputTree) -> dict:
    """For every node, the set of states from which the automaton accepts;
    computed bottom-up with an inner least fixpoint for stay-atoms."""
    accs: dict[tuple[int, ...], set[State]] = {}
    for w in sorted(tree.nodes, key=len, reverse=True):
        letter = tree.nodes[w]
        child_sets = tuple(accs.get(w + (d,)) for d in range(1, aut.directions + 1))
        residual = {q: _partial_eval(aut.delta(q, letter), child_sets)
                    for q in aut.states}
        accs[w] = _local_fixpoint(aut.states, residual)
    return accs


def ata_accepts(aut: AlternatingAutomaton, tree: InputTree) -> bool:
    return aut.initial in run_states(aut, tree)[()]


# -- emptiness ----------------------------------------------------------------


def _expanded(aut, state, letter, cache, stack=None):
    """The transition with stay-atoms inlined recursively, leaving a positive
    boolean formula over child-direction atoms only.  The stay-graph of the
    construction is acyclic, so this terminates."""
    key = (state, letter)
    hit = cache.get(key)
    if hit is not None:
        return hit
    if stack is None:
        stack = set()
    if key in stack:
        raise AssertionError(f"stay-cycle through {state}")
    stack.add(key)

    def expand(p):
        if isinstance(p, Atom):
            if p.direction == 0:
                return _expanded(aut, p.state, letter, cache, stack)
            return p
        if isinstance(p, AndB):
            return pand(expand(p.left), expand(p.right))
        if isinstance(p, OrB):
            return por(expand(p.left), expand(p.right))
        return p

    out = expand(aut.delta(state, letter))
    stack.discard(key)
    cache[key] = out
    return out


def _minimal_pairs(pairs):
    """Prune obligation pairs dominated componentwise by another pair."""
    pairs = sorted(set(pairs), key=lambda p: len(p[0]) + len(p[1]))
    out = []
    for cand in pairs:
        if not any(o[0] <= cand[0] and o[1] <= cand[1] for o in out):
            out.append(cand)
    return out


def _consistent(obligation) -> bool:
    # no tree node accepts both polarities of a formula (dichotomy), so an
    # obligation demanding both is unwinnable and can be dropped eagerly
    return all((f, 0) not in obligation for (f, p) in obligation if p == 1)


def _models(p: PBool, cap: int):
    """Minimal satisfying obligation pairs (states needed at child 1, at
    child 2) of a child-atom formula."""
    if p is TrueLeaf:
        return [(frozenset(), frozenset())]
    if p is FalseLeaf:
        return []
    if isinstance(p, Atom):
        if p.direction == 1:
            return [(frozenset([p.state]), frozenset())]
        return [(frozenset(), frozenset([p.state]))]
    if isinstance(p, OrB):
        out = _minimal_pairs(_models(p.left, cap) + _models(p.right, cap))
    elif isinstance(p, AndB):
        left = _models(p.left, cap)
        right = _models(p.right, cap)
        out = _minimal_pairs([(a[0] | b[0], a[1] | b[1]) for a in left for b in right])
    else:
        raise TypeError(f"not a positive boolean formula: {p!r}")
    if len(out) > cap:
        raise StateBudgetExceeded(f"over {cap} transition models")
    return out


class _Game:
    """AND-OR reachability over obligation sets with incremental win
    propagation; wins are founded, matching the least-fixpoint run
    semantics."""

    def __init__(self, aut, budget):
        self.aut = aut
        self.budget = budget
        self.letters = list(aut.letters())
        self.expand_cache: dict = {}
        self.model_cache: dict = {}
        self.model_cap = 4096
        self.moves_of: dict[frozenset, list] = {}
        self.parents: dict[frozenset, list] = {}
        self.win: dict[frozenset, tuple] = {}   # node -> winning move
        self.explored = 0

    def state_models(self, q, letter):
        key = (q, letter)
        hit = self.model_cache.get(key)
        if hit is None:
            raw = _models(_expanded(self.aut, q, letter, self.expand_cache),
                          self.model_cap)
            hit = [m for m in raw if _consistent(m[0]) and _consistent(m[1])]
            self.model_cache[key] = hit
        return hit

    def node_moves(self, node):
        out = []
        for letter in self.letters:
            combined = [(frozenset(), frozenset())]
            for q in node:
                ms = self.state_models(q, letter)
                if not ms:
                    combined = []
                    break
                combined = _minimal_pairs(
                    [(a[0] | b[0], a[1] | b[1]) for a in combined for b in ms])
                combined = [c for c in combined
                            if _consistent(c[0]) and _consistent(c[1])]
                if len(combined) > self.model_cap:
                    raise StateBudgetExceeded(
                        f"over {self.model_cap} transition models")
                if not combined:
                    break
            for kids in combined:
                if any(kids[d] and (d + 1) not in letter.flags
                       for d in range(self.aut.directions)):
                    continue
                children = tuple(kids[d] if (d + 1) in letter.flags else None
                                 for d in range(self.aut.directions))
                out.append((letter, children))
        return out

    def propagate(self, node):
        queue = [node]
        while queue:
            won = queue.pop()
            for record in self.parents.pop(won, ()):  # (parent, move, pending)
                parent, move = record[0], record[1]
                if parent in self.win:
                    continue
                record[2] -= 1
                if record[2] == 0:
                    self.win[parent] = move
                    queue.append(parent)

    def solve(self, root):
        from collections import deque
        queue = deque([root])
        while queue:
            if root in self.win:
                break
            node = queue.popleft()
            if node in self.moves_of:
                continue
            self.explored += 1
            if self.explored > self.budget:
                raise StateBudgetExceeded(
                    f"emptiness explored over {self.budget} obligation sets")
            moves = self.node_moves(node)
            self.moves_of[node] = moves
            for letter, children in moves:
                pending_children = [c for c in children
                                    if c is not None and c not in self.win]
                record = [node, (letter, children), len(pending_children)]
                if record[2] == 0:
                    if node not in self.win:
                        self.win[node] = (letter, children)
                        self.propagate(node)
                    break
                for c in pending_children:
                    self.parents.setdefault(c, []).append(record)
                    if c not in self.moves_of:
                        queue.append(c)
        return root in self.win


def _emptiness(aut: AlternatingAutomaton, budget: int) -> DecisionReport:
    """Solve the obligation game: a set of states is winnable if some letter
    and some way of discharging every state's transition leaves only
    winnable obligations at the existing children.  The language is
    non-empty exactly when {initial} is winnable."""
    game = _Game(aut, budget)
    root = frozenset([aut.initial])
    nonempty = game.solve(root)
    stats = {"states": len(aut.states), "obligation_sets": game.explored}
    if not nonempty:
        return DecisionReport("empty", holds=True, stats=stats)
    nodes: dict[tuple[int, ...], Letter] = {}

    def place(node, addr):
        letter, children = game.win[node]
        nodes[addr] = letter
        for d, child in enumerate(children, start=1):
            if child is not None:
                place(child, addr + (d,))

    place(root, ())
    return DecisionReport("nonempty", holds=False, witness=InputTree(nodes),
                          witness_kind="tree", stats=stats)


def ata_emptiness(aut: AlternatingAutomaton, budget: int = 2 ** 20) -> DecisionReport:
    """Empty/nonempty verdict with a witness tree on the nonempty side; the
    witness is re-validated by the run semantics."""
    report = _emptiness(aut, budget)
    if report.verdict == "nonempty":
        assert ata_accepts(aut, report.witness), "witness failed re-validation"
    return report


def asa_emptiness(aut: AlternatingAutomaton, budget: int = 2 ** 20) -> DecisionReport:
    if aut.directions != 1:
        raise ValueError("asa_emptiness needs a string automaton")
    return ata_emptiness(aut, budget)


# -- trees as structures --------------------------------------------------------


def structure_from_tree(tree: InputTree, term_var: str = "S$") -> GeneralizedStructure:
    """The generalized structure of an input tree: flag-reachable nodes,
    successor edges to flagged children, propositions from the letters, and
    the smallest partial order extending the edges."""
    reachable = [()]
    for w in reachable:
        for d in sorted(tree.nodes[w].flags):
            child = w + (d,)
            if child in tree.nodes:
                reachable.append(child)
    order = sorted(reachable, key=lambda w: (len(w), w))
    ids = {w: i for i, w in enumerate(order)}
    edges = set()
    for w in order:
        for d in tree.nodes[w].flags:
            child = w + (d,)
            if child in tree.nodes:
                edges.add((ids[w], ids[child]))
    closure = {(i, i) for i in ids.values()}
    frontier = set(edges)
    while frontier:
        closure |= frontier
        frontier = {(a, d) for a, b in frontier for c, d in edges if c == b} - closure
    props: dict[str, set[int]] = {}
    for w in order:
        for p in tree.nodes[w].props:
            props.setdefault(p, set()).add(ids[w])
    return GeneralizedStructure(
        tuple(range(len(order))), frozenset(closure),
        {term_var: frozenset(edges)},
        {p: frozenset(v) for p, v in props.items()})


def enumerate_trees(props, directions: int, max_nodes: int):
    """All flag-consistent input trees (a down-flag is present exactly when
    the child is) with at most max_nodes nodes, every proposition subset."""
    props = sorted(props)
    prop_sets = [frozenset(s) for k in range(len(props) + 1)
                 for s in itertools.combinations(props, k)]

    def shapes(n_nodes):
        # sets of addresses forming a tree with exactly n_nodes nodes
        if n_nodes == 1:
            yield {()}
            return
        for smaller in shapes(n_nodes - 1):
            for w in sorted(smaller):
                for d in range(1, directions + 1):
                    child = w + (d,)
                    if child not in smaller:
                        grown = smaller | {child}
                        yield grown

    for n in range(1, max_nodes + 1):
        seen = set()
        for shape in shapes(n):
            key = frozenset(shape)
            if key in seen:
                continue
            seen.add(key)
            addrs = sorted(shape, key=lambda w: (len(w), w))
            for assignment in itertools.product(prop_sets, repeat=len(addrs)):
                nodes = {}
                for w, ps in zip(addrs, assignment):
                    flags = frozenset(d for d in range(1, directions + 1)
                                      if w + (d,) in shape)
                    nodes[w] = Letter(ps, flags)
                yield InputTree(nodes)


# -- dumps ----------------------------------------------------------------------


def _render_state(state: State) -> str:
    from .printer import render_formula
    f, pol = state
    return f"({render_formula(f)}){pol}"


def _render_pbool(p: PBool) -> str:
    if p is TrueLeaf:
        return "T"
    if p is FalseLeaf:
        return "F"
    if isinstance(p, Atom):
        return f"(atom {p.direction} {_render_state(p.state)})"
    if isinstance(p, AndB):
        return f"(and {_render_pbool(p.left)} {_render_pbool(p.right)})"
    if isinstance(p, OrB):
        return f"(or {_render_pbool(p.left)} {_render_pbool(p.right)})"
    raise TypeError(f"not a positive boolean formula: {p!r}")


def render_automaton(aut: AlternatingAutomaton) -> str:
    """One line per (state, letter): transition in prefix notation."""
    lines = [f"kind {'ata' if aut.directions == 2 else 'asa'}",
             f"states {len(aut.states)}",
             f"initial {_render_state(aut.initial)}"]
    letters = list(aut.letters())
    for state in sorted(aut.states, key=_render_state):
        for letter in letters:
            lines.append(f"delta {_render_state(state)} {letter} := "
                         f"{_render_pbool(aut.delta(state, letter))}")
    return "\n".join(lines) + "\n"


def render_tree(tree: InputTree) -> str:
    """Indented node/letter lines."""
    lines = []
    for w in tree.addresses():
        label = ".".join(map(str, w)) if w else "root"
        lines.append("  " * len(w) + f"{label}: {tree.nodes[w]}")
    return "\n".join(lines) + "\n"
