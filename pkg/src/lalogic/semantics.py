"""Finite generalized structures and the relational semantics.

A structure has a finite universe of integer points, a universal relation
bounding every term-variable relation, unary sets for formula variables, and
nothing else.  Evaluation requires the universal relation to be a preorder
(reflexivity for ``1``, transitivity for ``;``); anything else raises
:class:`NotPreorder` rather than returning a partial answer.

Relations are handled internally as per-source bitmask rows, which keeps
composition and transitive closure cheap during the brute-force enumerations
used as oracles.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

from .errors import BudgetExceeded, NotPreorder
from .syntax import (
    Antidomain, Box, CapId, CapNid, Expr, FalseF, Formula, Implies, PVar,
    Plus, Seq, Star, Term, Test, Union, Var,
    domain, free_variables, iterate, sum_terms, ZERO,
)

__all__ = [
    "GeneralizedStructure", "StructClass", "Word", "make_structure",
    "word_structure", "validate_structure", "eval_term", "eval_formula",
    "bounded_language", "words_upto", "enumerate_structures", "bounded_counterexample",
    "relation_to_term", "generated_substructure",
    "parse_structure_file", "render_structure_file",
]

Pair = tuple[int, int]
Word = tuple[str, ...]


class StructClass(enum.Enum):
    PREORDER = "preorder"
    FINLIN = "finlin"
    STFINLIN = "stfinlin"
    STRICT_TREE = "stricttree"
    WORD_LIKE = "wordlike"


@dataclass(frozen=True)
class GeneralizedStructure:
    """Universe points are arbitrary integers (dense 0..n-1 from the
    constructors here; generated substructures keep their original ids)."""

    universe: tuple[int, ...]
    universal: frozenset[Pair]
    term_rel: dict[str, frozenset[Pair]]
    fml_set: dict[str, frozenset[int]]

    def __post_init__(self):
        if not self.universe:
            raise ValueError("universe must be non-empty")
        points = set(self.universe)
        if not all(a in points and b in points for a, b in self.universal):
            raise ValueError("universal relation leaves the universe")
        for name, rel in self.term_rel.items():
            if not rel <= self.universal:
                raise ValueError(f"relation for {name!r} is not bounded by the universal relation")
        for name, pts in self.fml_set.items():
            if not pts <= points:
                raise ValueError(f"set for {name!r} leaves the universe")

    @property
    def size(self) -> int:
        return len(self.universe)

    def __eq__(self, other):
        if not isinstance(other, GeneralizedStructure):
            return NotImplemented
        return (self.universe == other.universe
                and self.universal == other.universal
                and self.term_rel == other.term_rel
                and self.fml_set == other.fml_set)

    __hash__ = None


def make_structure(n: int, universal, term_rel=None, fml_set=None) -> GeneralizedStructure:
    return GeneralizedStructure(
        tuple(range(n)), frozenset(universal),
        {k: frozenset(v) for k, v in (term_rel or {}).items()},
        {k: frozenset(v) for k, v in (fml_set or {}).items()})


def word_structure(word, fml_vars=()) -> GeneralizedStructure:
    """The structure of a word: positions 0..|w|, one edge per character."""
    letters = list(word)
    n = len(letters) + 1
    rel: dict[str, set[Pair]] = {}
    for i, a in enumerate(letters):
        rel.setdefault(a, set()).add((i, i + 1))
    return make_structure(
        n, {(i, j) for i in range(n) for j in range(i, n)},
        rel, {p: frozenset() for p in fml_vars})


# -- evaluation --------------------------------------------------------------


class _Evaluator:
    """Bitmask-row evaluator for one structure."""

    def __init__(self, struc: GeneralizedStructure, allow_strict: bool = False):
        self.struc = struc
        ids = struc.universe
        self.index = {v: i for i, v in enumerate(ids)}
        self.n = len(ids)
        self.full = (1 << self.n) - 1
        self.univ_rows = self._rows(struc.universal)
        reflexive, transitive = self._order_properties()
        if not transitive or not (reflexive or allow_strict):
            raise NotPreorder("universal relation must be reflexive and transitive")
        self.diag = [1 << i for i in range(self.n)]
        self.term_cache: dict[Term, list[int]] = {}
        self.fml_cache: dict[Formula, int] = {}

    def _rows(self, pairs) -> list[int]:
        rows = [0] * self.n
        for a, b in pairs:
            rows[self.index[a]] |= 1 << self.index[b]
        return rows

    def _order_properties(self) -> tuple[bool, bool]:
        rows = self.univ_rows
        reflexive = all(rows[i] >> i & 1 for i in range(self.n))
        for i in range(self.n):
            succ = rows[i]
            j = 0
            rest = succ
            while rest:
                if rest & 1 and rows[j] & ~succ:
                    return reflexive, False
                rest >>= 1
                j += 1
        return reflexive, True

    def term(self, t: Term) -> list[int]:
        hit = self.term_cache.get(t)
        if hit is not None:
            return hit
        if isinstance(t, Var):
            out = self._rows(self.struc.term_rel.get(t.name, frozenset()))
        elif isinstance(t, Seq):
            left, right = self.term(t.left), self.term(t.right)
            out = []
            for row in left:
                acc, j, rest = 0, 0, row
                while rest:
                    if rest & 1:
                        acc |= right[j]
                    rest >>= 1
                    j += 1
                out.append(acc)
        elif isinstance(t, Union):
            left, right = self.term(t.left), self.term(t.right)
            out = [a | b for a, b in zip(left, right)]
        elif isinstance(t, Plus):
            out = self._transitive_closure(self.term(t.arg))
        elif isinstance(t, Star):
            closed = self._transitive_closure(self.term(t.arg))
            out = [row | d for row, d in zip(closed, self.diag)]
        elif isinstance(t, Antidomain):
            rows = self.term(t.arg)
            out = [d if not row else 0 for row, d in zip(rows, self.diag)]
        elif isinstance(t, CapId):
            rows = self.term(t.arg)
            out = [row & d for row, d in zip(rows, self.diag)]
        elif isinstance(t, CapNid):
            rows = self.term(t.arg)
            out = [row & ~d for row, d in zip(rows, self.diag)]
        elif isinstance(t, Test):
            mask = self.formula(t.fml)
            out = [d if mask >> i & 1 else 0 for i, d in enumerate(self.diag)]
        else:
            raise TypeError(f"not a term: {t!r}")
        self.term_cache[t] = out
        return out

    def _transitive_closure(self, rows: list[int]) -> list[int]:
        out = list(rows)
        changed = True
        while changed:
            changed = False
            for i in range(self.n):
                acc, j, rest = out[i], 0, out[i]
                while rest:
                    if rest & 1:
                        acc |= out[j]
                    rest >>= 1
                    j += 1
                if acc != out[i]:
                    out[i] = acc
                    changed = True
        return out

    def formula(self, f: Formula) -> int:
        hit = self.fml_cache.get(f)
        if hit is not None:
            return hit
        if isinstance(f, PVar):
            out = 0
            for v in self.struc.fml_set.get(f.name, frozenset()):
                out |= 1 << self.index[v]
        elif isinstance(f, FalseF):
            out = 0
        elif isinstance(f, Implies):
            out = (~self.formula(f.left) | self.formula(f.right)) & self.full
        elif isinstance(f, Box):
            rows = self.term(f.term)
            mask = self.formula(f.fml)
            out = 0
            for i, row in enumerate(rows):
                if not row & ~mask:
                    out |= 1 << i
        else:
            raise TypeError(f"not a formula: {f!r}")
        self.fml_cache[f] = out
        return out

    def pairs(self, rows: list[int]) -> frozenset[Pair]:
        ids = self.struc.universe
        out = set()
        for i, row in enumerate(rows):
            j, rest = 0, row
            while rest:
                if rest & 1:
                    out.add((ids[i], ids[j]))
                rest >>= 1
                j += 1
        return frozenset(out)

    def points(self, mask: int) -> frozenset[int]:
        ids = self.struc.universe
        return frozenset(ids[i] for i in range(self.n) if mask >> i & 1)


def eval_term(struc: GeneralizedStructure, t: Term,
              allow_strict: bool = False) -> frozenset[Pair]:
    """allow_strict drops the reflexivity requirement (transitivity stays);
    this is how identity-free formulas are read on strict frames."""
    ev = _Evaluator(struc, allow_strict)
    return ev.pairs(ev.term(t))


def eval_formula(struc: GeneralizedStructure, f: Formula,
                 allow_strict: bool = False) -> frozenset[int]:
    ev = _Evaluator(struc, allow_strict)
    return ev.points(ev.formula(f))


# -- class validation --------------------------------------------------------


def _is_preorder_pairs(universe, universal) -> bool:
    points = list(universe)
    succ = {v: {b for a, b in universal if a == v} for v in points}
    if any((v, v) not in universal for v in points):
        return False
    return all(succ[b] <= succ[a] for a in points for b in succ[a])


def _linear_order(universe, universal):
    """The points sorted by universal if it is a finite linear order, else None."""
    if not _is_preorder_pairs(universe, universal):
        return None
    points = list(universe)
    for a, b in universal:
        if a != b and (b, a) in universal:
            return None  # antisymmetry
    for a, b in itertools.combinations(points, 2):
        if (a, b) not in universal and (b, a) not in universal:
            return None  # totality
    order = sorted(points, key=lambda v: sum(1 for w in points if (v, w) in universal),
                   reverse=True)
    return order


def _word_shape(struc: GeneralizedStructure):
    """The underlying word if struc is isomorphic to a word structure after
    emptying the formula-variable sets, else None."""
    order = _linear_order(struc.universe, struc.universal)
    if order is None:
        return None
    consecutive = list(zip(order, order[1:]))
    letters = {}
    for name, rel in struc.term_rel.items():
        for pair in rel:
            if pair not in consecutive or pair in letters:
                return None
            letters[pair] = name
    if len(letters) != len(consecutive):
        return None
    return tuple(letters[p] for p in consecutive)


def _strict_tree_shape(struc: GeneralizedStructure) -> bool:
    edges = {}
    for name, rel in struc.term_rel.items():
        for a, b in rel:
            if (a, b) in edges:
                return False  # labels must be pairwise disjoint
            edges[(a, b)] = name
    parents: dict[int, int] = {}
    for a, b in edges:
        if b in parents or a == b:
            return False
        parents[b] = a
    roots = [v for v in struc.universe if v not in parents]
    if len(roots) != 1:
        return False
    root = roots[0]
    seen = {root}
    frontier = [root]
    children: dict[int, list[int]] = {}
    for (a, b) in edges:
        children.setdefault(a, []).append(b)
    while frontier:
        v = frontier.pop()
        for w in children.get(v, []):
            if w in seen:
                return False  # cycle
            seen.add(w)
            frontier.append(w)
    if seen != set(struc.universe):
        return False
    closure = {(v, v) for v in struc.universe}
    frontier2 = set(edges)
    while frontier2:
        closure |= frontier2
        frontier2 = {(a, c) for a, b in frontier2 for c in children.get(b, ())} - closure
    return struc.universal == frozenset(closure)


def validate_structure(struc: GeneralizedStructure, cls: StructClass) -> bool:
    if cls is StructClass.PREORDER:
        return _is_preorder_pairs(struc.universe, struc.universal)
    if cls is StructClass.FINLIN:
        return _linear_order(struc.universe, struc.universal) is not None
    if cls is StructClass.STFINLIN:
        return _word_shape(struc) is not None
    if cls is StructClass.WORD_LIKE:
        return (_word_shape(struc) is not None
                and all(not pts for pts in struc.fml_set.values()))
    if cls is StructClass.STRICT_TREE:
        return _strict_tree_shape(struc)
    raise ValueError(f"unknown structure class {cls!r}")


# -- bounded languages -------------------------------------------------------


def words_upto(alphabet, max_len: int):
    letters = sorted(alphabet)
    for n in range(max_len + 1):
        for word in itertools.product(letters, repeat=n):
            yield word


def bounded_language(t: Term, alphabet, max_len: int, kind: str = "word"):
    """Match triples (w, i, j) or full-span words of t, over all words of
    length at most max_len."""
    if kind not in ("match", "word"):
        raise ValueError("kind must be 'match' or 'word'")
    out = set()
    for word in words_upto(alphabet, max_len):
        rel = eval_term(word_structure(word), t)
        if kind == "word":
            if (0, len(word)) in rel:
                out.add(word)
        else:
            for i, j in rel:
                out.add((word, i, j))
    return out


# -- enumeration -------------------------------------------------------------


def _subsets(items):
    items = list(items)
    for mask in range(1 << len(items)):
        yield frozenset(x for i, x in enumerate(items) if mask >> i & 1)


def _emit(builder, budget):
    count = 0
    for struc in builder:
        count += 1
        if budget is not None and count > budget:
            raise BudgetExceeded(f"enumeration exceeded budget of {budget}")
        yield struc


def _preorders(n: int):
    diag = {(i, i) for i in range(n)}
    off = [(i, j) for i in range(n) for j in range(n) if i != j]
    for extra in _subsets(off):
        rel = frozenset(diag | extra)
        if _is_preorder_pairs(range(n), rel):
            yield rel


def _assignments(universal, universe, alphabet, fml_vars):
    order_pairs = sorted(universal)
    for rels in itertools.product(*[list(_subsets(order_pairs)) for _ in alphabet]):
        term_rel = dict(zip(alphabet, rels))
        for sets in itertools.product(*[list(_subsets(universe)) for _ in fml_vars]):
            yield term_rel, dict(zip(fml_vars, sets))


def _trees(n: int, alphabet):
    """Rooted labelled trees with ids in parent-before-child order."""
    labels = sorted(alphabet)
    if not labels and n > 1:
        return
    for parents in itertools.product(*[range(i) for i in range(1, n)]):
        edges = [(p, i + 1) for i, p in enumerate(parents)]
        for labelling in itertools.product(labels, repeat=len(edges)):
            rel: dict[str, set[Pair]] = {a: set() for a in labels}
            for (a, b), letter in zip(edges, labelling):
                rel[letter].add((a, b))
            yield edges, rel


def enumerate_structures(alphabet, fml_vars, max_size: int, cls: StructClass,
                         budget: int | None = None):
    """Exhaustively yield structures of the class, duplicate-free up to the
    canonical id ordering; every one validates for cls."""
    if max_size < 1:
        raise ValueError("max_size must be at least 1")
    alphabet = sorted(alphabet)
    fml_vars = sorted(fml_vars)

    def build():
        for n in range(1, max_size + 1):
            universe = tuple(range(n))
            if cls is StructClass.PREORDER:
                for universal in _preorders(n):
                    for term_rel, fml in _assignments(universal, universe, alphabet, fml_vars):
                        yield GeneralizedStructure(universe, universal, term_rel, fml)
            elif cls is StructClass.FINLIN:
                universal = frozenset((i, j) for i in range(n) for j in range(i, n))
                for term_rel, fml in _assignments(universal, universe, alphabet, fml_vars):
                    yield GeneralizedStructure(universe, universal, term_rel, fml)
            elif cls in (StructClass.STFINLIN, StructClass.WORD_LIKE):
                for word in itertools.product(alphabet, repeat=n - 1):
                    base = word_structure(word, fml_vars)
                    if cls is StructClass.WORD_LIKE:
                        yield base
                        continue
                    for sets in itertools.product(*[list(_subsets(universe)) for _ in fml_vars]):
                        yield GeneralizedStructure(
                            base.universe, base.universal, base.term_rel,
                            dict(zip(fml_vars, sets)))
            elif cls is StructClass.STRICT_TREE:
                for edges, rel in _trees(n, alphabet):
                    closure = {(v, v) for v in universe}
                    frontier = set(edges)
                    while frontier:
                        closure |= frontier
                        frontier = {(a, d) for a, b in frontier
                                    for c, d in edges if c == b} - closure
                    universal = frozenset(closure)
                    term_rel = {a: frozenset(r) for a, r in rel.items()}
                    for sets in itertools.product(*[list(_subsets(universe)) for _ in fml_vars]):
                        yield GeneralizedStructure(universe, universal, term_rel,
                                                   dict(zip(fml_vars, sets)))
            else:
                raise ValueError(f"unknown structure class {cls!r}")

    return _emit(build(), budget)


def bounded_counterexample(f: Formula, cls: StructClass, max_size: int,
                           budget: int | None = None):
    """A structure of the class (size bounded) and a point refuting f, if the
    enumeration contains one."""
    tvars, fvars = free_variables(f)
    for struc in enumerate_structures(tvars, fvars, max_size, cls, budget):
        truth = eval_formula(struc, f)
        for v in struc.universe:
            if v not in truth:
                return struc, v
    return None


# -- representing relations by terms ------------------------------------------


def relation_to_term(m: int, rel, letter: str = "c") -> Term:
    """A single-letter term whose value on the word c^m is exactly rel."""
    pairs = sorted(rel)
    for i, j in pairs:
        if not 0 <= i <= j <= m:
            raise ValueError(f"pair {(i, j)} is not an order pair of 0..{m}")
    c = Var(letter)
    parts = []
    for i, j in pairs:
        parts.append(Seq(Seq(domain(iterate(c, m - i)),
                             Antidomain(iterate(c, m - i + 1))),
                         iterate(c, j - i)))
    return sum_terms(parts) if parts else ZERO


def generated_substructure(struc: GeneralizedStructure, v: int) -> GeneralizedStructure:
    """Restriction to the points reachable from v through any term relation."""
    if v not in struc.universe:
        raise ValueError(f"{v} is not in the universe")
    step: dict[int, set[int]] = {}
    for rel in struc.term_rel.values():
        for a, b in rel:
            step.setdefault(a, set()).add(b)
    seen = {v}
    frontier = [v]
    while frontier:
        a = frontier.pop()
        for b in step.get(a, ()):
            if b not in seen:
                seen.add(b)
                frontier.append(b)
    keep = tuple(sorted(seen))
    inside = lambda p: p[0] in seen and p[1] in seen
    return GeneralizedStructure(
        keep,
        frozenset(p for p in struc.universal if inside(p)),
        {a: frozenset(p for p in rel if inside(p)) for a, rel in struc.term_rel.items()},
        {p: frozenset(x for x in pts if x in seen) for p, pts in struc.fml_set.items()})


# -- structure files ----------------------------------------------------------


def parse_structure_file(text: str) -> GeneralizedStructure:
    """Line-oriented format: ``size N``, then ``universal i j`` pairs (or
    ``class finlin`` to auto-fill the reflexive total order), ``rel a i j``,
    ``prop P i``.  ``#`` starts a comment."""
    n = None
    universal: set[Pair] = set()
    term_rel: dict[str, set[Pair]] = {}
    fml_set: dict[str, set[int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "size":
                n = int(parts[1])
            elif parts[0] == "universal":
                universal.add((int(parts[1]), int(parts[2])))
            elif parts[0] == "class":
                if parts[1] != "finlin":
                    raise ValueError(f"unknown class {parts[1]!r}")
                if n is None:
                    raise ValueError("'class finlin' needs a preceding 'size'")
                universal |= {(i, j) for i in range(n) for j in range(i, n)}
            elif parts[0] == "rel":
                term_rel.setdefault(parts[1], set()).add((int(parts[2]), int(parts[3])))
            elif parts[0] == "prop":
                fml_set.setdefault(parts[1], set()).add(int(parts[2]))
            else:
                raise ValueError(f"unknown directive {parts[0]!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"structure file line {lineno}: {exc}") from None
    if n is None:
        raise ValueError("structure file must declare a size")
    return make_structure(n, universal, term_rel, fml_set)


def render_structure_file(struc: GeneralizedStructure) -> str:
    ids = {v: i for i, v in enumerate(struc.universe)}  # re-densify ids
    lines = [f"size {len(struc.universe)}"]
    for a, b in sorted(struc.universal):
        lines.append(f"universal {ids[a]} {ids[b]}")
    for name in sorted(struc.term_rel):
        for a, b in sorted(struc.term_rel[name]):
            lines.append(f"rel {name} {ids[a]} {ids[b]}")
    for name in sorted(struc.fml_set):
        for v in sorted(struc.fml_set[name]):
            lines.append(f"prop {name} {ids[v]}")
    return "\n".join(lines) + "\n"
