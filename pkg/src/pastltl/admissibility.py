"""Admissibility of inference rules: sound certificates plus bounded search.

A rule is admissible when every substitution turning all premises into
theorems also turns the conclusion into a theorem.  :func:`admissible_status`
tries, in order,

1. frame validity (a rule valid under every valuation is admissible),
2. the N-elimination pattern ``phi(N x.., N y S N z..) / phi(x.., y S z..)``,
3. a search for a substitution witnessing non-admissibility,

and otherwise answers :class:`Unknown`.

The search runs over semantic equivalence classes of candidate formulas.
Substituting equivalent formulas yields equivalent instances, so one
representative per class loses nothing.  Classes and theoremhood are both
decided exactly on finite windows: a formula's truth at position 0 depends
only on the letters at positions ``0 .. temporal_reach``, and every position
of every model is position 0 of a shifted model.  Windows are evaluated
bit-parallel, one bit per window.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterator, Optional, Union

import numpy as np

from .decision import DEFAULT_NODE_BUDGET, LassoWitness, frame_valid_rule, is_theorem
from .errors import CapacityExceeded
from .normal_form import rnf_to_rule, rnf_transform, to_single_premise
from .semantics import eval_formula
from .syntax import (TOP, BOTTOM, And, Atom, Bottom, Formula, Implies, Next, Not,
                     Or, Rule, Since, Top, apply_substitution, atoms, expand_derived,
                     height, render, size, temporal_reach)


@dataclass(frozen=True)
class SearchBudget:
    max_depth: int = 2
    extra_letters: int = 1
    m: int = 1
    node_budget: int = DEFAULT_NODE_BUDGET

    def __post_init__(self):
        if min(self.max_depth, self.extra_letters, self.node_budget) < 0:
            raise ValueError("search budget fields must be naturals")
        if self.m < 1:
            raise ValueError("m must be >= 1")


# ---------------------------------------------------------------- verdicts

@dataclass(frozen=True)
class FrameValidity:
    def to_json(self) -> dict[str, Any]:
        return {"kind": "frame_validity"}


@dataclass(frozen=True)
class NEliminationPattern:
    """``premise = template(N x.., N y S N z..)``, ``conclusion = template(x.., y S z..)``."""

    template: Formula
    p_slots: tuple[tuple[str, str], ...]               # (template letter, x)
    q_slots: tuple[tuple[str, str, str], ...]          # (template letter, y, z)

    def instantiate(self, eliminated: bool) -> Formula:
        s: dict[str, Formula] = {}
        for p, x in self.p_slots:
            s[p] = Atom(x) if eliminated else Next(Atom(x))
        for q, y, z in self.q_slots:
            s[q] = Since(Atom(y), Atom(z)) if eliminated else \
                Since(Next(Atom(y)), Next(Atom(z)))
        return apply_substitution(self.template, s)

    def to_json(self) -> dict[str, Any]:
        return {"kind": "n_elimination", "template": render(self.template),
                "p_slots": {p: x for p, x in self.p_slots},
                "q_slots": {q: [y, z] for q, y, z in self.q_slots}}


@dataclass(frozen=True)
class Derivable:
    """Reserved for rules whose conclusion is itself a theorem."""

    def to_json(self) -> dict[str, Any]:
        return {"kind": "derivable"}


Certificate = Union[FrameValidity, NEliminationPattern, Derivable]


@dataclass(frozen=True)
class Admissible:
    certificate: Certificate
    frame_countermodel: Optional[LassoWitness] = None

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"verdict": "admissible", "certificate": self.certificate.to_json()}
        if self.frame_countermodel is not None:
            doc["frame_countermodel"] = self.frame_countermodel.to_json()
        return doc


@dataclass(frozen=True)
class NotAdmissible:
    witness: dict[str, Formula]
    premise_instances: tuple[Formula, ...]
    conclusion_instance: Formula
    conclusion_countermodel: LassoWitness

    def to_json(self) -> dict[str, Any]:
        return {"verdict": "not_admissible",
                "witness": {x: render(f) for x, f in sorted(self.witness.items())},
                "premise_instances": [render(f) for f in self.premise_instances],
                "conclusion_instance": render(self.conclusion_instance),
                "countermodel": self.conclusion_countermodel.to_json()}


@dataclass(frozen=True)
class Unknown:
    bounds: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {"verdict": "unknown", "bounds": dict(self.bounds)}


Verdict = Union[Admissible, NotAdmissible, Unknown]


# ---------------------------------------------------------------- N-elimination

def match_n_elimination(r: Rule) -> Optional[NEliminationPattern]:
    r = to_single_premise(r)
    premise, conclusion = expand_derived(r.premises[0]), expand_derived(r.conclusion)
    p_slots: dict[str, str] = {}
    q_slots: dict[tuple[str, str], str] = {}

    def is_var(f: Formula) -> bool:
        return isinstance(f, Atom)

    def walk(p: Formula, c: Formula) -> Optional[Formula]:
        if isinstance(p, Next) and is_var(p.child) and c == p.child:
            x = c.name
            p_slots.setdefault(x, f"p{len(p_slots) + 1}")
            return Atom(p_slots[x])
        if (isinstance(p, Since) and isinstance(p.left, Next) and isinstance(p.right, Next)
                and is_var(p.left.child) and is_var(p.right.child)
                and c == Since(p.left.child, p.right.child)):
            key = (p.left.child.name, p.right.child.name)
            q_slots.setdefault(key, f"q{len(q_slots) + 1}")
            return Atom(q_slots[key])
        if type(p) is not type(c):
            return None
        if isinstance(p, (Top, Bottom)):
            return p
        if isinstance(p, Not):
            t = walk(p.child, c.child)
            return None if t is None else Not(t)
        if isinstance(p, (And, Or, Implies)):
            left = walk(p.left, c.left)
            right = walk(p.right, c.right) if left is not None else None
            return None if right is None else type(p)(left, right)
        return None

    template = walk(premise, conclusion)
    if template is None:
        return None
    cert = NEliminationPattern(template, tuple((p, x) for x, p in p_slots.items()),
                               tuple((q, y, z) for (y, z), q in q_slots.items()))
    assert cert.instantiate(False) == premise and cert.instantiate(True) == conclusion
    return cert


# ---------------------------------------------------------------- window algebra

class WindowAlgebra:
    """Truth of formulas on every valuation of ``letters`` over ``width`` positions.

    ``eval(f)[j]`` is an int whose bit ``w`` is the truth of ``f`` at position
    ``j`` of window ``w``; it is exact whenever ``j + temporal_reach(f) < width``.
    """

    def __init__(self, letters: list[str], width: int, m: int):
        self.letters = list(letters)
        self.width = width
        self.m = m
        self.nwindows = 2 ** (len(self.letters) * width)
        self.nbytes = max(1, self.nwindows // 8)
        self.full = (1 << self.nwindows) - 1
        ids = np.arange(self.nwindows, dtype=np.int64)
        self.base: dict[str, list[int]] = {}
        for li, x in enumerate(self.letters):
            vec = []
            for j in range(width):
                bits = ((ids >> (li * width + j)) & 1).astype(np.uint8)
                vec.append(int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little"))
            self.base[x] = vec
        self.memo: dict[Formula, list[int]] = {}

    def eval(self, f: Formula) -> list[int]:
        if f in self.memo:
            return self.memo[f]
        W, full = self.width, self.full
        if isinstance(f, Atom):
            out = self.base[f.name]
        elif isinstance(f, Top):
            out = [full] * W
        elif isinstance(f, Bottom):
            out = [0] * W
        elif isinstance(f, Not):
            out = [full ^ v for v in self.eval(f.child)]
        elif isinstance(f, Next):
            out = self.eval(f.child)[1:] + [0]
        else:
            a, b = self.eval(f.left), self.eval(f.right)
            if isinstance(f, And):
                out = [x & y for x, y in zip(a, b)]
            elif isinstance(f, Or):
                out = [x | y for x, y in zip(a, b)]
            elif isinstance(f, Implies):
                out = [(full ^ x) | y for x, y in zip(a, b)]
            elif isinstance(f, Since):
                out = []
                for j in range(W):
                    acc, hold = 0, full
                    for k in range(j, min(j + self.m, W - 1) + 1):
                        acc |= hold & b[k]
                        hold &= a[k]
                    out.append(acc)
            else:
                return self.eval(expand_derived(f))
        self.memo[f] = out
        return out

    def valid(self, f: Formula) -> bool:
        """Theoremhood of ``f``, exact when ``temporal_reach(f) < width``."""
        return self.eval(f)[0] == self.full

    def to_array(self, v: int) -> np.ndarray:
        return np.frombuffer(v.to_bytes(self.nbytes, "little"), dtype=np.uint8)

    def pad_mask(self) -> np.ndarray:
        return self.to_array(self.full)


def window_theorem(f: Formula, m: int) -> bool:
    """Theoremhood by exhausting all windows; an independent route to :func:`is_theorem`."""
    f = expand_derived(f)
    letters = sorted(atoms(f)) or ["p"]
    return WindowAlgebra(letters, temporal_reach(f, m) + 1, m).valid(f)


# ---------------------------------------------------------------- candidates

_OP_RANK = {Not: 0, Next: 1, And: 2, Or: 3, Implies: 4, Since: 5}


def leaves(letters: list[str]) -> list[Formula]:
    return [Atom(x) for x in letters] + [TOP, BOTTOM]


def order_key(f: Formula, leaf_rank: dict[Formula, int]) -> tuple:
    seq: list[int] = []

    def walk(g: Formula) -> None:
        if g in leaf_rank:
            seq.append(leaf_rank[g])
            return
        seq.append(100 + _OP_RANK[type(g)])
        if isinstance(g, (Not, Next)):
            walk(g.child)
        else:
            walk(g.left)
            walk(g.right)

    walk(f)
    return (size(f), height(f), tuple(seq))


def candidate_formulas(letters: list[str], max_depth: int) -> list[Formula]:
    """Every core formula of height <= ``max_depth`` over ``letters``, true and
    false, duplicate-free and ordered by size (then height, then leaf order)."""
    levels = [leaves(letters)]
    everything = list(levels[0])
    for d in range(1, max_depth + 1):
        below = everything
        top = levels[-1]
        new: list[Formula] = [op(f) for op in (Not, Next) for f in top]
        for op in (And, Or, Implies, Since):
            for a in below:
                for b in below:
                    if height(a) == d - 1 or height(b) == d - 1:
                        new.append(op(a, b))
        levels.append(new)
        everything = everything + new
    rank = {f: i for i, f in enumerate(levels[0])}
    return sorted(everything, key=lambda f: order_key(f, rank))


@dataclass(frozen=True)
class CandidateClass:
    representative: Formula
    height: int
    fingerprint: int


def candidate_classes(letters: list[str], max_depth: int, m: int) -> list[CandidateClass]:
    """One representative per equivalence class of formulas of height <= ``max_depth``."""
    alg = WindowAlgebra(letters, max_depth * m + 1, m)
    rank = {f: i for i, f in enumerate(leaves(letters))}
    found: dict[int, tuple[tuple, Formula, int]] = {}

    def offer(f: Formula, h: int) -> None:
        fp = alg.eval(f)[0]
        key = order_key(f, rank)
        best = found.get(fp)
        if best is None or (h, key) < (best[2], best[0]):
            found[fp] = (key, f, h)

    for f in leaves(letters):
        offer(f, 0)
    for d in range(1, max_depth + 1):
        reps = sorted((v for v in found.values() if v[2] <= d - 1), key=lambda v: v[0])
        fresh_reps = [v for v in reps if v[2] == d - 1]
        for _, f, _ in fresh_reps:
            offer(Not(f), d)
            offer(Next(f), d)
        for op in (And, Or, Implies, Since):
            for _, a, ha in reps:
                for _, b, hb in reps:
                    if ha == d - 1 or hb == d - 1:
                        offer(op(a, b), d)
    out = [CandidateClass(f, h, fp) for fp, (key, f, h) in found.items()]
    out.sort(key=lambda c: (c.height, order_key(c.representative, rank)))
    return out


def search_letters(r: Rule, extra_letters: int) -> tuple[list[str], list[str]]:
    """(fresh letters, rule letters); fresh ones come first in the candidate order."""
    taken = set(r.variables)
    fresh: list[str] = []
    for name in itertools.chain("pqrstuvw", (f"p{k}" for k in itertools.count(1))):
        if len(fresh) == extra_letters:
            break
        if name not in taken:
            fresh.append(name)
    return fresh, sorted(taken)


def substitution_stream(r: Rule, budget: SearchBudget) -> Iterator[dict[str, Formula]]:
    """All substitutions over :func:`candidate_formulas`, by largest component height,
    then lexicographically."""
    fresh, rule_letters = search_letters(r, budget.extra_letters)
    pool = candidate_formulas(fresh + rule_letters, budget.max_depth)
    xs = sorted(r.variables)
    for level in range(budget.max_depth + 1):
        usable = [f for f in pool if height(f) <= level]
        for combo in itertools.product(usable, repeat=len(xs)):
            if max((height(f) for f in combo), default=0) == level:
                yield dict(zip(xs, combo))
        if not xs:
            return


# ---------------------------------------------------------------- vectorized search

def _np_eval(f: Formula, env: dict[str, list[np.ndarray]], P: int, m: int,
             ones: np.ndarray) -> list[np.ndarray]:
    """Truth of ``f`` at positions ``0 .. P-1``; ``env`` maps rule variables to
    per-position byte arrays (any leading shape, broadcast together)."""
    if isinstance(f, Atom):
        return env[f.name]
    if isinstance(f, Top):
        return [ones] * P
    if isinstance(f, Bottom):
        return [np.zeros_like(ones)] * P
    if isinstance(f, Not):
        return [~v for v in _np_eval(f.child, env, P, m, ones)]
    if isinstance(f, Next):
        c = _np_eval(f.child, env, P, m, ones)
        return c[1:] + [np.zeros_like(ones)]
    a = _np_eval(f.left, env, P, m, ones)
    b = _np_eval(f.right, env, P, m, ones)
    if isinstance(f, And):
        return [x & y for x, y in zip(a, b)]
    if isinstance(f, Or):
        return [x | y for x, y in zip(a, b)]
    if isinstance(f, Implies):
        return [~x | y for x, y in zip(a, b)]
    out = []
    for j in range(P):
        acc, hold = None, None
        for k in range(j, min(j + m, P - 1) + 1):
            term = b[k] if hold is None else hold & b[k]
            acc = term if acc is None else acc | term
            hold = a[k] if hold is None else hold & a[k]
        out.append(acc)
    return out


def _all_windows(v: np.ndarray, pad: np.ndarray) -> np.ndarray:
    return np.all((v & pad) == pad, axis=-1)


def _search(r: Rule, budget: SearchBudget, want_conclusion_failure: bool) -> Optional[dict[str, Formula]]:
    r = to_single_premise(r)
    premise, conclusion = expand_derived(r.premises[0]), expand_derived(r.conclusion)
    m = budget.m
    xs = sorted(r.variables)
    fresh, rule_letters = search_letters(r, budget.extra_letters)
    letters = fresh + rule_letters
    classes = candidate_classes(letters, budget.max_depth, m)
    reach = temporal_reach(premise, m)
    if want_conclusion_failure:
        reach = max(reach, temporal_reach(conclusion, m))
    P = reach + 1
    width = P + budget.max_depth * m
    nwindows = 2 ** (len(letters) * width)
    if nwindows > budget.node_budget:
        raise CapacityExceeded("substitution-search windows", nwindows, budget.node_budget)
    if len(classes) * P * nwindows // 8 > 2 ** 29:
        raise CapacityExceeded("substitution-search memory (bytes)",
                               len(classes) * P * nwindows // 8, 2 ** 29)
    alg = WindowAlgebra(letters, width, m)
    pad = alg.pad_mask()
    ones = pad.copy()
    values = np.stack([np.stack([alg.to_array(v) for v in alg.eval(c.representative)[:P]])
                       for c in classes])           # (classes, P, bytes)
    heights = np.array([c.height for c in classes])

    if not xs:
        ok = bool(_all_windows(_np_eval(premise, {}, P, m, ones)[0], pad))
        if ok and (not want_conclusion_failure
                   or not _all_windows(_np_eval(conclusion, {}, P, m, ones)[0], pad)):
            return {}
        return None

    *outer_vars, inner_var = xs
    for level in range(budget.max_depth + 1):
        usable = int(np.searchsorted(heights, level, side="right"))
        inner = values[:usable]
        inner_env = [inner[:, j, :] for j in range(P)]
        for combo in itertools.product(range(usable), repeat=len(outer_vars)):
            outer_max = max((classes[i].height for i in combo), default=-1)
            level_ok = heights[:usable] == level if outer_max < level else np.ones(usable, bool)
            if outer_max > level or not level_ok.any():
                continue
            env = {x: [values[i, j] for j in range(P)] for x, i in zip(outer_vars, combo)}
            env[inner_var] = inner_env
            prem = _np_eval(premise, env, P, m, ones)[0]
            hit = np.broadcast_to(_all_windows(prem, pad), (usable,)) & level_ok
            if want_conclusion_failure and hit.any():
                concl = _np_eval(conclusion, env, P, m, ones)[0]
                hit &= ~np.broadcast_to(_all_windows(concl, pad), (usable,))
            idx = np.flatnonzero(hit)
            if len(idx):
                chosen = list(combo) + [int(idx[0])]
                return {x: classes[i].representative for x, i in zip(xs, chosen)}
    return None


def _instances(r: Rule, s: dict[str, Formula]) -> tuple[tuple[Formula, ...], Formula]:
    return (tuple(apply_substitution(p, s) for p in r.premises),
            apply_substitution(r.conclusion, s))


def find_non_admissibility_witness(r: Rule, budget: SearchBudget = SearchBudget()
                                   ) -> Optional[dict[str, Formula]]:
    """First substitution (in candidate order) making every premise a theorem and
    the conclusion a non-theorem, or None within the budget."""
    return _search(r, budget, want_conclusion_failure=True)


def premises_unifiable(r: Rule, budget: SearchBudget = SearchBudget()) -> Optional[dict[str, Formula]]:
    return _search(r, budget, want_conclusion_failure=False)


def _verified_not_admissible(r: Rule, s: dict[str, Formula], budget: SearchBudget) -> NotAdmissible:
    premises, concl = _instances(r, s)
    for p in premises:
        if not is_theorem(p, budget.m, budget.node_budget):
            raise AssertionError(f"witness premise instance {render(p)} is not a theorem")
    verdict = is_theorem(concl, budget.m, budget.node_budget)
    if verdict.valid:
        raise AssertionError(f"witness conclusion instance {render(concl)} is a theorem")
    cm = verdict.countermodel
    if eval_formula(cm.model, concl, cm.position):
        raise AssertionError("conclusion countermodel does not re-verify")
    return NotAdmissible(dict(s), premises, concl, cm)


def admissible_status(r: Rule, budget: SearchBudget = SearchBudget(),
                      check_rnf: bool = False) -> Verdict:
    verdict = _pipeline(r, budget)
    if check_rnf:
        other = _pipeline(rnf_to_rule(rnf_transform(r)), budget)
        kinds = {type(verdict), type(other)}
        if kinds == {Admissible, NotAdmissible}:
            raise AssertionError(f"rule and its normal form disagree: {verdict} vs {other}")
    return verdict


def _pipeline(r: Rule, budget: SearchBudget) -> Verdict:
    frame_note = "checked"
    countermodel = None
    try:
        countermodel = frame_valid_rule(r, budget.m, budget.node_budget)
        if countermodel is None:
            return Admissible(FrameValidity())
    except CapacityExceeded as exc:
        frame_note = f"capacity exceeded ({exc})"
    cert = match_n_elimination(r)
    if cert is not None:
        return Admissible(cert, countermodel)
    s = find_non_admissibility_witness(r, budget)
    if s is not None:
        return _verified_not_admissible(r, s, budget)
    fresh, rule_letters = search_letters(r, budget.extra_letters)
    return Unknown({"letters": fresh + rule_letters, "max_depth": budget.max_depth,
                    "m": budget.m, "frame_validity": frame_note})


def verdict_to_json(v: Verdict) -> dict[str, Any]:
    return v.to_json()
