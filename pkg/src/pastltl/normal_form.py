"""Reduced normal form (RNF) of inference rules.

An RNF rule is ``eps / x_1`` where ``eps`` is a disjunction of total state
descriptions over the atoms ``x_i``, ``N x_i`` and ``x_i S x_k`` (``i != k``).

Compilation renames every non-variable argument of ``N``/``S`` (and a
non-atomic conclusion) to a fresh variable, collects the premise together with
the definitional equivalences of the fresh variables into one Boolean
constraint over those atoms, and enumerates all total sign assignments that
satisfy it.  Only Boolean consistency is checked here; temporal coherence of
the signs is the decision procedure's job.

Sign convention: a stored bit ``b`` stands for the literal ``A^b`` with
``A^0 = A`` and ``A^1 = ~A``, so ``False`` (0) means "positive".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterator

import numpy as np

from .errors import CapacityExceeded
from .syntax import (And, Atom, Bottom, Formula, Implies, Next, Not, Or, Rule,
                     Since, Top, atoms, conj, disj, expand_derived)

DEFAULT_DISJUNCT_LIMIT = 2 ** 20


def to_single_premise(r: Rule) -> Rule:
    if len(r.premises) == 1:
        return r
    return Rule((conj(r.premises),), r.conclusion)


def collapse_reflexive_since(f: Formula) -> Formula:
    """Rewrite ``a S a`` to ``a``; the two agree at every position of every model."""
    if isinstance(f, (Atom, Top, Bottom)):
        return f
    if isinstance(f, (Not, Next)):
        return type(f)(collapse_reflexive_since(f.child))
    left, right = collapse_reflexive_since(f.left), collapse_reflexive_since(f.right)
    if isinstance(f, Since) and left == right:
        return left
    return type(f)(left, right)


# ---------------------------------------------------------------- layout

@dataclass(frozen=True)
class AtomLayout:
    """Bit positions of the ``n(n+1)`` RNF atoms inside a disjunct code.

    The most significant bit is ``t0`` of ``x_1``; then the rest of ``t0``,
    then ``t1``, then ``tS`` in row-major ``(i, k)`` order.  Numeric order of
    codes is therefore lexicographic order of sign vectors.
    """

    n: int

    @property
    def width(self) -> int:
        return self.n * (self.n + 1)

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, k) for i in range(self.n) for k in range(self.n) if i != k]

    def index_t0(self, i: int) -> int:
        return i

    def index_t1(self, i: int) -> int:
        return self.n + i

    def index_ts(self, i: int, k: int) -> int:
        return 2 * self.n + i * (self.n - 1) + (k if k < i else k - 1)

    def shift_of(self, index: int) -> int:
        return self.width - 1 - index


@dataclass(frozen=True)
class RnfDisjunct:
    t0: tuple[bool, ...]
    t1: tuple[bool, ...]
    tS: tuple[tuple[bool | None, ...], ...]  # diagonal is None

    def literals(self, variables: tuple[str, ...]) -> list[Formula]:
        def lit(f: Formula, bit: bool) -> Formula:
            return Not(f) if bit else f

        out = [lit(Atom(x), b) for x, b in zip(variables, self.t0)]
        out += [lit(Next(Atom(x)), b) for x, b in zip(variables, self.t1)]
        for i, row in enumerate(self.tS):
            for k, bit in enumerate(row):
                if i != k:
                    out.append(lit(Since(Atom(variables[i]), Atom(variables[k])), bit))
        return out


def encode(layout: AtomLayout, d: RnfDisjunct) -> int:
    code = 0
    for i in range(layout.n):
        code |= int(d.t0[i]) << layout.shift_of(layout.index_t0(i))
        code |= int(d.t1[i]) << layout.shift_of(layout.index_t1(i))
    for i, k in layout.pairs():
        code |= int(d.tS[i][k]) << layout.shift_of(layout.index_ts(i, k))
    return code


def decode(layout: AtomLayout, code: int) -> RnfDisjunct:
    def bit(index: int) -> bool:
        return bool(code >> layout.shift_of(index) & 1)

    n = layout.n
    t0 = tuple(bit(layout.index_t0(i)) for i in range(n))
    t1 = tuple(bit(layout.index_t1(i)) for i in range(n))
    ts = tuple(tuple(None if i == k else bit(layout.index_ts(i, k)) for k in range(n))
               for i in range(n))
    return RnfDisjunct(t0, t1, ts)


@dataclass(frozen=True)
class RnfRule:
    variables: tuple[str, ...]
    codes: tuple[int, ...]  # sorted, duplicate-free disjunct codes

    @property
    def conclusion(self) -> str:
        return self.variables[0]

    @property
    def layout(self) -> AtomLayout:
        return AtomLayout(len(self.variables))

    @property
    def disjuncts(self) -> list[RnfDisjunct]:
        layout = self.layout
        return [decode(layout, c) for c in self.codes]

    def __len__(self) -> int:
        return len(self.codes)

    def __iter__(self) -> Iterator[RnfDisjunct]:
        layout = self.layout
        return (decode(layout, c) for c in self.codes)

    @classmethod
    def from_disjuncts(cls, variables, disjuncts) -> "RnfRule":
        layout = AtomLayout(len(variables))
        return cls(tuple(variables), tuple(sorted({encode(layout, d) for d in disjuncts})))


# ---------------------------------------------------------------- renaming

@dataclass(frozen=True)
class Renaming:
    """Result of flattening a rule: every temporal argument is a variable."""

    variables: tuple[str, ...]          # conclusion variable first
    premise: Formula                    # Boolean over RNF atoms
    definitions: tuple[tuple[str, Formula], ...]  # fresh variable -> Boolean over RNF atoms


def _fresh_names(taken: set[str]) -> Iterator[str]:
    k = 1
    while True:
        name = f"x_{k}"
        if name not in taken:
            taken.add(name)
            yield name
        k += 1


def rename_rule(r: Rule) -> Renaming:
    r = to_single_premise(r)
    premise = collapse_reflexive_since(expand_derived(r.premises[0]))
    conclusion = collapse_reflexive_since(expand_derived(r.conclusion))
    user = sorted(atoms(premise) | atoms(conclusion) | r.variables)
    fresh = _fresh_names(set(user))
    names: dict[Formula, str] = {}
    reserved = {} if isinstance(conclusion, Atom) else {conclusion: next(fresh)}
    definitions: list[tuple[str, Formula]] = []

    def var(f: Formula) -> Atom:
        if isinstance(f, Atom):
            return f
        if f not in names:
            body = lower(f)
            names[f] = reserved.get(f) or next(fresh)
            definitions.append((names[f], body))
        return Atom(names[f])

    def lower(f: Formula) -> Formula:
        if isinstance(f, (Atom, Top, Bottom)):
            return f
        if isinstance(f, Not):
            return Not(lower(f.child))
        if isinstance(f, Next):
            return Next(var(f.child))
        if isinstance(f, Since):
            return Since(var(f.left), var(f.right))
        return type(f)(lower(f.left), lower(f.right))

    lowered_premise = lower(premise)
    conclusion_var = var(conclusion).name
    ordered = [conclusion_var] + [x for x in user if x != conclusion_var] + \
        [name for name, _ in definitions if name != conclusion_var]
    return Renaming(tuple(ordered), lowered_premise, tuple(definitions))


# ---------------------------------------------------------------- expansion

def _rnf_atom_index(layout: AtomLayout, pos: dict[str, int], f: Formula) -> int:
    if isinstance(f, Atom):
        return layout.index_t0(pos[f.name])
    if isinstance(f, Next):
        return layout.index_t1(pos[f.child.name])
    return layout.index_ts(pos[f.left.name], pos[f.right.name])


def _used_atoms(layout, pos, f: Formula, out: set[int]) -> None:
    if isinstance(f, (Atom, Next, Since)):
        out.add(_rnf_atom_index(layout, pos, f))
    elif isinstance(f, Not):
        _used_atoms(layout, pos, f.child, out)
    elif isinstance(f, (And, Or, Implies)):
        _used_atoms(layout, pos, f.left, out)
        _used_atoms(layout, pos, f.right, out)


def _truth(layout, pos, f: Formula, column) -> np.ndarray:
    if isinstance(f, Top):
        return np.True_
    if isinstance(f, Bottom):
        return np.False_
    if isinstance(f, (Atom, Next, Since)):
        return column(_rnf_atom_index(layout, pos, f))
    if isinstance(f, Not):
        return ~_truth(layout, pos, f.child, column)
    a = _truth(layout, pos, f.left, column)
    b = _truth(layout, pos, f.right, column)
    if isinstance(f, And):
        return a & b
    if isinstance(f, Or):
        return a | b
    return ~a | b


def disjunct_count_bound(n: int) -> int:
    return 2 ** (n * (n + 1))


def rnf_transform(r: Rule, limit: int = DEFAULT_DISJUNCT_LIMIT) -> RnfRule:
    """Compile ``r`` to its reduced normal form.

    Raises :class:`CapacityExceeded` when the exact number of disjuncts is
    larger than ``limit``.
    """
    ren = rename_rule(r)
    n = len(ren.variables)
    layout = AtomLayout(n)
    if layout.width > 62:
        raise CapacityExceeded("RNF atoms per disjunct", layout.width, 62)
    pos = {x: i for i, x in enumerate(ren.variables)}
    defined = {layout.index_t0(pos[name]) for name, _ in ren.definitions}

    used: set[int] = set()
    _used_atoms(layout, pos, ren.premise, used)
    for _, body in ren.definitions:
        _used_atoms(layout, pos, body, used)
    relevant = sorted(used - defined)
    free_rest = [i for i in range(layout.width) if i not in used and i not in defined]

    # enumerate assignments of the atoms the constraint mentions
    k = len(relevant)
    if k > 26:
        raise CapacityExceeded("RNF constraint atoms", 2 ** k, 2 ** 26)
    rows = np.arange(2 ** k, dtype=np.int64)
    true_cols = {idx: ((rows >> j) & 1).astype(bool) for j, idx in enumerate(relevant)}
    computed: dict[int, np.ndarray] = {}

    def column(index: int) -> np.ndarray:
        if index in true_cols:
            return true_cols[index]
        return computed[index]

    for name, body in ren.definitions:
        computed[layout.index_t0(pos[name])] = np.broadcast_to(
            _truth(layout, pos, body, column), rows.shape)
    ok = np.broadcast_to(_truth(layout, pos, ren.premise, column), rows.shape)
    sat = np.flatnonzero(ok)

    total = len(sat) * 2 ** len(free_rest)
    if total > limit:
        raise CapacityExceeded("RNF disjunct count", total, limit)
    assert total <= disjunct_count_bound(n)

    codes = np.zeros(len(sat), dtype=np.int64)
    for idx in list(true_cols) + list(computed):
        col = column(idx)[sat]
        # stored bit 1 means the negated literal
        codes |= (~col).astype(np.int64) << layout.shift_of(idx)
    for idx in free_rest:
        codes = np.concatenate([codes, codes | (1 << layout.shift_of(idx))])
    codes = np.unique(codes)
    return RnfRule(ren.variables, tuple(int(c) for c in codes))


def rnf_to_rule(nf: RnfRule) -> Rule:
    premise = disj((conj(d.literals(nf.variables)) for d in nf), balanced=True)
    return Rule((premise,), Atom(nf.conclusion))


def rnf_to_json(nf: RnfRule) -> dict[str, Any]:
    def bits(v):
        return [None if b is None else int(b) for b in v]

    return {
        "variables": list(nf.variables),
        "conclusion": nf.conclusion,
        "disjuncts": [{"t0": bits(d.t0), "t1": bits(d.t1), "tS": [bits(row) for row in d.tS]}
                      for d in nf],
    }


def rnf_from_json(doc: dict[str, Any]) -> RnfRule:
    variables = tuple(doc["variables"])
    if doc.get("conclusion", variables[0]) != variables[0]:
        raise ValueError("conclusion must be the first variable")
    ds = [RnfDisjunct(tuple(bool(b) for b in d["t0"]), tuple(bool(b) for b in d["t1"]),
                      tuple(tuple(None if b is None else bool(b) for b in row) for row in d["tS"]))
          for d in doc["disjuncts"]]
    return RnfRule.from_disjuncts(variables, ds)
