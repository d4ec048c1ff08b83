"""Satisfiability, theoremhood and rule refutation over the uniform-``m`` frame.

Both procedures search a *window graph*.  A node is ``m + 1`` consecutive rows
of a candidate model; it is admitted when the state at its first row is
coherent with the rest of the window, and an edge shifts the window by one
position.  Because Next looks one step ahead and bounded Since at most ``m``
steps, coherent infinite row sequences are exactly the infinite paths of this
graph, and an infinite path from a node exists iff the node reaches a cycle.
The first such lasso found is turned into a :class:`PeriodicModel`.

* formula mode: rows assign a truth value to every subformula and must be
  Boolean-consistent; coherence checks the ``N``/``S`` values of the first row.
* RNF mode: rows are valuations of the RNF variables; the state description of
  the first row (values of ``x_i``, ``N x_i``, ``x_i S x_k``) must be one of the
  disjuncts of the premise.

``brute_force_sat`` is an independent oracle that enumerates small lassos and
evaluates them with :mod:`pastltl.semantics`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Iterator, Optional

from .errors import CapacityExceeded
from .normal_form import AtomLayout, RnfRule, rnf_transform
from .semantics import (PeriodicModel, Uniform, eval_formula, model_to_json,
                        rule_holds, truth_table, with_letters)
from .syntax import (And, Atom, Bottom, Formula, Implies, Next, Not, Or, Rule,
                     Since, Top, atoms, conj, expand_derived, parse_rule, subformulas,
                     temporal_reach)

DEFAULT_NODE_BUDGET = 2 ** 22

WindowNode = tuple[int, ...]
"""``m + 1`` consecutive rows, each row encoded as a bit set."""


@dataclass(frozen=True)
class LassoWitness:
    model: PeriodicModel
    position: int
    verdict: str  # "sat" or "refuted"

    def to_json(self) -> dict[str, Any]:
        doc = model_to_json(self.model)
        doc["position"] = self.position
        doc["verdict"] = self.verdict
        return doc


@dataclass(frozen=True)
class TheoremResult:
    valid: bool
    countermodel: Optional[LassoWitness] = None

    def __bool__(self) -> bool:
        return self.valid


def _check_m(m: int) -> None:
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"m must be a natural >= 1, got {m!r}")


# ---------------------------------------------------------------- graph search

class _WindowGraph:
    def __init__(self, m: int, candidates: Callable[[WindowNode], Iterable[int]],
                 coherent: Callable[[WindowNode], bool], budget: int):
        self.m = m
        self.candidates = candidates
        self.coherent = coherent
        self.budget = budget
        self.dead: set[WindowNode] = set()
        self.expanded = 0

    def successors(self, node: WindowNode) -> Iterator[WindowNode]:
        self.expanded += 1
        if self.expanded > self.budget:
            raise CapacityExceeded("window graph nodes", self.expanded, self.budget)
        tail = node[1:]
        for r in self.candidates(node):
            succ = tail + (r,)
            if self.coherent(succ):
                yield succ

    def lasso(self, start: WindowNode) -> Optional[tuple[list[WindowNode], int]]:
        """Path from ``start`` whose last edge closes a cycle, or None if ``start`` is dead.

        Returns ``(path, k)``: ``path[k:]`` is the cycle.
        """
        if start in self.dead:
            return None
        path = [start]
        index = {start: 0}
        stack = [self.successors(start)]
        while stack:
            for succ in stack[-1]:
                if succ in index:
                    return path, index[succ]
                if succ in self.dead:
                    continue
                index[succ] = len(path)
                path.append(succ)
                stack.append(self.successors(succ))
                break
            else:
                stack.pop()
                node = path.pop()
                del index[node]
                self.dead.add(node)
        return None


def _lasso_rows(path: list[WindowNode], k: int) -> tuple[list[int], list[int]]:
    rows = [node[0] for node in path]
    return rows[:k], rows[k:]


def _compact(prefix: list, loop: list) -> tuple[list, list]:
    """Smallest lasso with the same denotation."""
    for p in range(1, len(loop) + 1):
        if len(loop) % p == 0 and loop == loop[:p] * (len(loop) // p):
            loop = loop[:p]
            break
    while prefix and prefix[-1] == loop[-1]:
        loop = [prefix.pop()] + loop[:-1]
    return prefix, loop


# ---------------------------------------------------------------- formula mode

class _FormulaSpace:
    """Rows are Boolean-consistent valuations of every subformula of ``f``.

    With an ``invariant`` every row must also make it true, so each position
    of a found lasso satisfies it.
    """

    def __init__(self, f: Formula, m: int, budget: int, invariant: Optional[Formula] = None):
        self.f = expand_derived(f if invariant is None else And(invariant, f))
        self.m = m
        self.subs = subformulas(self.f)
        self.index = {g: i for i, g in enumerate(self.subs)}
        self.letters = sorted(atoms(self.f))
        base = [g for g in self.subs if isinstance(g, (Atom, Next, Since))]
        if 2 ** len(base) > budget:
            raise CapacityExceeded("formula-mode rows", 2 ** len(base), budget)
        self.rows = sorted(self._complete(dict(zip(base, bits)))
                           for bits in itertools.product((False, True), repeat=len(base)))
        if invariant is not None:
            inv = self.index[expand_derived(invariant)]
            self.rows = [r for r in self.rows if r >> inv & 1]
        self.nexts = [(self.index[g], self.index[g.child]) for g in self.subs
                      if isinstance(g, Next)]
        self.sinces = [(self.index[g], self.index[g.left], self.index[g.right])
                       for g in self.subs if isinstance(g, Since)]
        self.child_mask = 0
        for _, c in self.nexts:
            self.child_mask |= 1 << c
        self.by_pattern: dict[int, list[int]] = {}
        for r in self.rows:
            self.by_pattern.setdefault(r & self.child_mask, []).append(r)
        self.root = self.index[self.f]

    def _complete(self, base: dict[Formula, bool]) -> int:
        val: dict[Formula, bool] = {}
        for g in self.subs:
            if g in base:
                v = base[g]
            elif isinstance(g, Top):
                v = True
            elif isinstance(g, Bottom):
                v = False
            elif isinstance(g, Not):
                v = not val[g.child]
            elif isinstance(g, And):
                v = val[g.left] and val[g.right]
            elif isinstance(g, Or):
                v = val[g.left] or val[g.right]
            else:
                v = (not val[g.left]) or val[g.right]
            val[g] = v
        return sum(1 << i for i, g in enumerate(self.subs) if val[g])

    def required(self, r: int) -> int:
        """Bits the next row must carry on the children of Next nodes."""
        out = 0
        for i, c in self.nexts:
            if r >> i & 1:
                out |= 1 << c
        return out

    def next_rows(self, r: int) -> list[int]:
        return self.by_pattern.get(self.required(r), [])

    def since_coherent(self, window: WindowNode) -> bool:
        r0 = window[0]
        for i, left, right in self.sinces:
            holds = False
            for rb in window:
                if rb >> right & 1:
                    holds = True
                    break
                if not rb >> left & 1:
                    break
            if holds != bool(r0 >> i & 1):
                return False
        return True

    def starts(self) -> Iterator[WindowNode]:
        def extend(prefix: tuple[int, ...]) -> Iterator[WindowNode]:
            if len(prefix) == self.m + 1:
                if self.since_coherent(prefix):
                    yield prefix
                return
            for r in self.next_rows(prefix[-1]):
                yield from extend(prefix + (r,))

        for r0 in self.rows:
            if r0 >> self.root & 1:
                yield from extend((r0,))

    def graph(self, budget: int) -> _WindowGraph:
        return _WindowGraph(self.m, lambda node: self.next_rows(node[-1]),
                            self.since_coherent, budget)

    def row_letters(self, r: int) -> frozenset[str]:
        return frozenset(x for x in self.letters if r >> self.index[Atom(x)] & 1)


def satisfiable(f: Formula, m: int, node_budget: int = DEFAULT_NODE_BUDGET) -> Optional[LassoWitness]:
    """A model in which ``f`` holds at position 0, or None if ``f`` is unsatisfiable."""
    _check_m(m)
    space = _FormulaSpace(f, m, node_budget)
    g = space.graph(node_budget)
    for start in space.starts():
        found = g.lasso(start)
        if found is None:
            continue
        prefix, loop = _compact(*_lasso_rows(*found))
        model = PeriodicModel(tuple(space.letters), tuple(map(space.row_letters, prefix)),
                              tuple(map(space.row_letters, loop)), Uniform(m))
        if not eval_formula(model, f, 0):
            raise AssertionError(f"unsound satisfiability witness for {f}")
        return LassoWitness(model, 0, "sat")
    return None


def is_theorem(f: Formula, m: int, node_budget: int = DEFAULT_NODE_BUDGET) -> TheoremResult:
    w = satisfiable(Not(f), m, node_budget)
    if w is None:
        return TheoremResult(True)
    return TheoremResult(False, LassoWitness(w.model, w.position, "refuted"))


# ---------------------------------------------------------------- RNF mode

class _RnfSpace:
    """Rows are valuations of the RNF variables; bit ``i`` is ``x_{i+1}``."""

    def __init__(self, nf: RnfRule, m: int):
        self.nf = nf
        self.m = m
        self.n = len(nf.variables)
        self.layout = AtomLayout(self.n)
        self.codes = frozenset(nf.codes)
        self.all_rows = list(range(2 ** self.n))
        lay = self.layout
        self.t0_shift = [lay.shift_of(lay.index_t0(i)) for i in range(self.n)]
        self.t1_shift = [lay.shift_of(lay.index_t1(i)) for i in range(self.n)]
        self.ts_shift = [(i, k, lay.shift_of(lay.index_ts(i, k))) for i, k in lay.pairs()]

    def code(self, window: WindowNode) -> int:
        r0, r1 = window[0], window[1]
        code = 0
        for i in range(self.n):
            if not r0 >> i & 1:
                code |= 1 << self.t0_shift[i]
            if not r1 >> i & 1:
                code |= 1 << self.t1_shift[i]
        for i, k, sh in self.ts_shift:
            holds = False
            for rb in window:
                if rb >> k & 1:
                    holds = True
                    break
                if not rb >> i & 1:
                    break
            if not holds:
                code |= 1 << sh
        return code

    def coherent(self, window: WindowNode) -> bool:
        return self.code(window) in self.codes

    def starts(self) -> Iterator[WindowNode]:
        if not self.codes:
            return
        for window in itertools.product(self.all_rows, repeat=self.m + 1):
            if not window[0] & 1 and self.coherent(window):
                yield window

    def graph(self, budget: int) -> _WindowGraph:
        return _WindowGraph(self.m, lambda node: self.all_rows, self.coherent, budget)

    def row_letters(self, r: int) -> frozenset[str]:
        return frozenset(x for i, x in enumerate(self.nf.variables) if r >> i & 1)


def verify_rnf_refutation(nf: RnfRule, model: PeriodicModel, position: int) -> bool:
    """Re-check through the evaluator that every position satisfies a disjunct
    of the premise and that the conclusion variable fails at ``position``."""
    xs = nf.variables
    lay = AtomLayout(len(xs))
    tables = {}
    for i, x in enumerate(xs):
        tables[lay.index_t0(i)] = truth_table(model, Atom(x))
        tables[lay.index_t1(i)] = truth_table(model, Next(Atom(x)))
    for i, k in lay.pairs():
        tables[lay.index_ts(i, k)] = truth_table(model, Since(Atom(xs[i]), Atom(xs[k])))
    codes = set(nf.codes)
    for a in range(model.offset + len(model.loop)):
        code = 0
        for idx, table in tables.items():
            if not table[a]:
                code |= 1 << lay.shift_of(idx)
        if code not in codes:
            return False
    return not eval_formula(model, Atom(nf.conclusion), position)


def refutable_rnf(nf: RnfRule, m: int, node_budget: int = DEFAULT_NODE_BUDGET) -> Optional[LassoWitness]:
    """A model validating the premise of ``nf`` everywhere and falsifying ``x_1``."""
    _check_m(m)
    if not nf.variables:
        raise ValueError("RNF rule without variables")
    space = _RnfSpace(nf, m)
    g = space.graph(node_budget)
    for start in space.starts():
        found = g.lasso(start)
        if found is None:
            continue
        prefix, loop = _compact(*_lasso_rows(*found))
        model = PeriodicModel(nf.variables, tuple(map(space.row_letters, prefix)),
                              tuple(map(space.row_letters, loop)), Uniform(m))
        if not verify_rnf_refutation(nf, model, 0):
            raise AssertionError("unsound RNF refutation witness")
        return LassoWitness(model, 0, "refuted")
    return None


def refute_rule_directly(r: Rule, m: int, node_budget: int = DEFAULT_NODE_BUDGET
                         ) -> Optional[LassoWitness]:
    """Refuting model for ``r`` found without the normal form.

    Searches formula-mode windows whose every row satisfies the premises and
    whose first row falsifies the conclusion.  Shifting a refuting model to
    the failing position keeps the premises valid, so position 0 loses nothing.
    """
    _check_m(m)
    space = _FormulaSpace(Not(r.conclusion), m, node_budget, invariant=conj(r.premises))
    g = space.graph(node_budget)
    for start in space.starts():
        found = g.lasso(start)
        if found is None:
            continue
        prefix, loop = _compact(*_lasso_rows(*found))
        model = PeriodicModel(tuple(sorted(r.variables)), tuple(map(space.row_letters, prefix)),
                              tuple(map(space.row_letters, loop)), Uniform(m))
        return LassoWitness(model, 0, "refuted")
    return None


def frame_valid_rule(r: Rule, m: int, node_budget: int = DEFAULT_NODE_BUDGET,
                     disjunct_limit: Optional[int] = None) -> Optional[LassoWitness]:
    """None when ``r`` holds in every model of the frame, else a refuting model.

    Goes through the reduced normal form; when that is too large to build, the
    rule is refuted directly in formula mode instead.
    """
    _check_m(m)
    try:
        nf = rnf_transform(r) if disjunct_limit is None else rnf_transform(r, disjunct_limit)
    except CapacityExceeded:
        nf = None
    w = refute_rule_directly(r, m, node_budget) if nf is None else refutable_rnf(nf, m, node_budget)
    if w is None:
        return None
    model = with_letters(w.model, sorted(r.variables))
    if rule_holds(model, r):
        raise AssertionError(f"projected countermodel does not refute {r}")
    position = next(a for a in range(model.offset + len(model.loop))
                    if not eval_formula(model, r.conclusion, a))
    return LassoWitness(model, position, "refuted")


def theorem_rule(f: Formula) -> Rule:
    """The rule ``x -> x / f`` whose frame validity coincides with theoremhood of ``f``."""
    return Rule((Implies(Atom("x"), Atom("x")),), f)


# ---------------------------------------------------------------- oracle

def lasso_size_bound(f: Formula, m: int) -> int:
    """Lasso size that suffices to find a model of any satisfiable ``f``.

    Truth at position 0 depends only on positions ``0 .. temporal_reach``, so the
    first ``temporal_reach + 1`` rows of any model, with the last one repeated as
    the loop, form a model of the same size.
    """
    return temporal_reach(expand_derived(f), m) + 1


def enumerate_models(letters: list[str], m: int, size_bound: int) -> Iterator[PeriodicModel]:
    """All lassos with ``|prefix| + |loop| <= size_bound``, smallest first."""
    letters = sorted(letters)
    valuations = [frozenset(c for c, bit in zip(letters, bits) if bit)
                  for bits in itertools.product((False, True), repeat=len(letters))]
    for total in range(1, size_bound + 1):
        for plen in range(total):
            for rows in itertools.product(valuations, repeat=total):
                yield PeriodicModel(tuple(letters), rows[:plen], rows[plen:], Uniform(m))


def brute_force_sat(f: Formula, m: int, size_bound: int) -> Optional[LassoWitness]:
    _check_m(m)
    core = expand_derived(f)
    for model in enumerate_models(sorted(atoms(core)), m, size_bound):
        if truth_table(model, core)[0]:
            return LassoWitness(model, 0, "sat")
    return None


def brute_force_refutation(r: Rule, m: int, size_bound: int) -> Optional[LassoWitness]:
    """Smallest lasso over the rule's letters in which ``r`` fails."""
    _check_m(m)
    for model in enumerate_models(sorted(r.variables), m, size_bound):
        if not rule_holds(model, r):
            a = next(a for a in range(model.offset + len(model.loop))
                     if not eval_formula(model, r.conclusion, a))
            return LassoWitness(model, a, "refuted")
    return None


__all__ = [
    "LassoWitness", "TheoremResult", "WindowNode", "satisfiable", "is_theorem",
    "refutable_rnf", "frame_valid_rule", "brute_force_sat", "brute_force_refutation",
    "lasso_size_bound", "enumerate_models", "verify_rnf_refutation", "theorem_rule",
    "refute_rule_directly",
    "DEFAULT_NODE_BUDGET", "parse_rule",
]
