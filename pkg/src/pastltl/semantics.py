"""Lasso-presented models and evaluation under bounded and unbounded Since.

Positions are natural numbers and time runs towards the past: ``N f`` at
``a`` is ``f`` at ``a + 1``.  A model lists a finite ``prefix`` of rows
followed by a ``loop`` repeated forever; each row is the set of letters true
at that position.

Bounded Since: ``f S g`` holds at ``a`` iff some ``b`` in ``[a, a + w_a]``
satisfies ``g`` and ``f`` holds on every ``c`` with ``a <= c < b``.  The window
length ``w_a`` is ``m`` for a uniform bound, or read from the window lists of
a non-uniform bound.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Iterable, Mapping, Sequence, Union

from .errors import InvalidModel, NonUniformShift, UnknownAtom
from .syntax import (And, Atom, Bottom, Formula, Implies, Next, Not, Or, Rule,
                     Since, Top, atoms, conj, expand_derived, is_core)

Row = frozenset  # letters true at one position


@dataclass(frozen=True)
class Uniform:
    m: int

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 1:
            raise InvalidModel(f"bound.uniform: must be a natural >= 1, got {self.m!r}")

    def window(self, a: int) -> int:
        return self.m

    @property
    def settles_at(self) -> int:
        return 0


@dataclass(frozen=True)
class NonUniform:
    """Per-position window lengths ``w_a = m_a - a``.

    Strictly increasing frame bounds ``m_a`` make ``w`` non-decreasing, and an
    eventually periodic non-decreasing sequence is eventually constant, so
    ``window_loop`` must hold a single repeated value.
    """

    window_prefix: tuple[int, ...]
    window_loop: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "window_prefix", tuple(self.window_prefix))
        object.__setattr__(self, "window_loop", tuple(self.window_loop))
        if not self.window_loop:
            raise InvalidModel("bound.window_loop: must be nonempty")
        ws = self.window_prefix + self.window_loop
        for i, w in enumerate(ws):
            if not isinstance(w, int) or w < 1:
                raise InvalidModel(f"bound: window length #{i} must be a natural >= 1, got {w!r}")
        if len(set(self.window_loop)) != 1:
            raise InvalidModel("bound.window_loop: must be constant (window lengths never decrease)")
        if any(x > y for x, y in zip(ws, ws[1:])):
            raise InvalidModel("bound: window lengths must be non-decreasing")

    def window(self, a: int) -> int:
        if a < len(self.window_prefix):
            return self.window_prefix[a]
        return self.window_loop[0]

    @property
    def settles_at(self) -> int:
        return len(self.window_prefix)


Bound = Union[Uniform, NonUniform]


@dataclass(frozen=True)
class PeriodicModel:
    letters: tuple[str, ...]
    prefix: tuple[Row, ...]
    loop: tuple[Row, ...]
    bound: Bound

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(self.letters))
        object.__setattr__(self, "prefix", tuple(frozenset(r) for r in self.prefix))
        object.__setattr__(self, "loop", tuple(frozenset(r) for r in self.loop))
        if not self.loop:
            raise InvalidModel("loop: must be nonempty")
        known = set(self.letters)
        for part in ("prefix", "loop"):
            for i, row in enumerate(getattr(self, part)):
                stray = row - known
                if stray:
                    raise InvalidModel(f"{part}[{i}]: letters {sorted(stray)} not declared")

    @classmethod
    def uniform(cls, m: int, prefix: Sequence[Iterable[str]], loop: Sequence[Iterable[str]],
                letters: Iterable[str] | None = None) -> "PeriodicModel":
        rows = [frozenset(r) for r in (*prefix, *loop)]
        if letters is None:
            letters = sorted(set().union(*rows)) if rows else []
        return cls(tuple(letters), tuple(rows[:len(prefix)]), tuple(rows[len(prefix):]), Uniform(m))

    def row(self, a: int) -> Row:
        if a < len(self.prefix):
            return self.prefix[a]
        return self.loop[(a - len(self.prefix)) % len(self.loop)]

    @property
    def offset(self) -> int:
        """First position from which truth of every formula repeats with the loop period."""
        return max(len(self.prefix), self.bound.settles_at)

    @property
    def m(self) -> int:
        if not isinstance(self.bound, Uniform):
            raise ValueError("model has a non-uniform bound")
        return self.bound.m


@dataclass(frozen=True)
class TruthVector:
    prefix_truth: tuple[bool, ...]
    loop_truth: tuple[bool, ...]
    offset: int

    def __getitem__(self, a: int) -> bool:
        if a < self.offset:
            return self.prefix_truth[a]
        return self.loop_truth[(a - self.offset) % len(self.loop_truth)]

    def everywhere(self) -> bool:
        return all(self.prefix_truth) and all(self.loop_truth)


# ---------------------------------------------------------------- evaluation

def _check_letters(model: PeriodicModel, f: Formula) -> None:
    stray = atoms(f) - set(model.letters)
    if stray:
        raise UnknownAtom(f"atoms {sorted(stray)} are not letters of the model")


def _table(model: PeriodicModel, f: Formula, bounded: bool) -> list[bool]:
    """Truth of ``f`` at positions ``0 .. offset + |loop| - 1``.

    Positions past the end wrap to ``offset`` because truth is periodic from
    there on.
    """
    off, period = model.offset, len(model.loop)
    n = off + period
    memo: dict[Formula, list[bool]] = {}

    def nxt(a: int) -> int:
        return a + 1 if a + 1 < n else off

    def go(g: Formula) -> list[bool]:
        if g in memo:
            return memo[g]
        if isinstance(g, Atom):
            out = [g.name in model.row(a) for a in range(n)]
        elif isinstance(g, Top):
            out = [True] * n
        elif isinstance(g, Bottom):
            out = [False] * n
        elif isinstance(g, Not):
            out = [not v for v in go(g.child)]
        elif isinstance(g, And):
            out = [x and y for x, y in zip(go(g.left), go(g.right))]
        elif isinstance(g, Or):
            out = [x or y for x, y in zip(go(g.left), go(g.right))]
        elif isinstance(g, Implies):
            out = [(not x) or y for x, y in zip(go(g.left), go(g.right))]
        elif isinstance(g, Next):
            c = go(g.child)
            out = [c[nxt(a)] for a in range(n)]
        elif isinstance(g, Since):
            hold, trigger = go(g.left), go(g.right)
            out = _since_bounded(model, hold, trigger, nxt) if bounded \
                else _since_unbounded(hold, trigger, nxt)
        else:
            raise TypeError(f"not a core formula: {g!r}")
        memo[g] = out
        return out

    return go(f)


def _since_bounded(model, hold, trigger, nxt) -> list[bool]:
    out = []
    for a in range(len(hold)):
        c, ok = a, False
        for _ in range(model.bound.window(a) + 1):
            if trigger[c]:
                ok = True
                break
            if not hold[c]:
                break
            c = nxt(c)
        out.append(ok)
    return out


def _since_unbounded(hold, trigger, nxt) -> list[bool]:
    # least fixpoint of  v(a) = trigger(a) or (hold(a) and v(a+1))
    n = len(hold)
    out = list(trigger)
    changed = True
    while changed:
        changed = False
        for a in range(n - 1, -1, -1):
            if not out[a] and hold[a] and out[nxt(a)]:
                out[a] = True
                changed = True
    return out


@lru_cache(maxsize=4096)
def _vector(model: PeriodicModel, f: Formula, bounded: bool) -> TruthVector:
    _check_letters(model, f)
    table = _table(model, f if is_core(f) else expand_derived(f), bounded)
    off = model.offset
    return TruthVector(tuple(table[:off]), tuple(table[off:]), off)


def truth_table(model: PeriodicModel, f: Formula, bounded: bool = True) -> list[bool]:
    """Uncached truth of ``f`` at positions ``0 .. offset + |loop| - 1``."""
    _check_letters(model, f)
    return _table(model, f if is_core(f) else expand_derived(f), bounded)


def truth_vector(model: PeriodicModel, f: Formula) -> TruthVector:
    return _vector(model, f, True)


def truth_vector_unbounded(model: PeriodicModel, f: Formula) -> TruthVector:
    return _vector(model, f, False)


def eval_formula(model: PeriodicModel, f: Formula, a: int) -> bool:
    """Truth of ``f`` at position ``a`` under the bounded Since."""
    return _vector(model, f, True)[a]


def eval_unbounded(model: PeriodicModel, f: Formula, a: int) -> bool:
    """Truth of ``f`` at ``a`` when Since may look arbitrarily far (transitive time)."""
    return _vector(model, f, False)[a]


def rule_holds(model: PeriodicModel, r: Rule) -> bool:
    if not _vector(model, conj(r.premises), True).everywhere():
        _check_letters(model, r.conclusion)
        return True
    return _vector(model, r.conclusion, True).everywhere()


def shift(model: PeriodicModel, k: int) -> PeriodicModel:
    """The model whose position ``a`` is position ``a + k`` of ``model``."""
    if not isinstance(model.bound, Uniform):
        raise NonUniformShift("shifting a model with a non-uniform bound changes its meaning")
    if k <= len(model.prefix):
        return PeriodicModel(model.letters, model.prefix[k:], model.loop, model.bound)
    r = (k - len(model.prefix)) % len(model.loop)
    return PeriodicModel(model.letters, (), model.loop[r:] + model.loop[:r], model.bound)


def with_letters(model: PeriodicModel, letters: Iterable[str]) -> PeriodicModel:
    letters = tuple(letters)
    keep = set(letters)
    return PeriodicModel(letters, tuple(r & keep for r in model.prefix),
                         tuple(r & keep for r in model.loop), model.bound)


# ---------------------------------------------------------------- JSON

def _rows_to_json(model: PeriodicModel, rows) -> list[dict[str, bool]]:
    return [{x: x in row for x in model.letters} for row in rows]


def model_to_json(model: PeriodicModel) -> dict[str, Any]:
    if isinstance(model.bound, Uniform):
        bound: dict[str, Any] = {"uniform": model.bound.m}
    else:
        bound = {"window_prefix": list(model.bound.window_prefix),
                 "window_loop": list(model.bound.window_loop)}
    return {"letters": list(model.letters), "bound": bound,
            "prefix": _rows_to_json(model, model.prefix),
            "loop": _rows_to_json(model, model.loop)}


def _parse_rows(doc: Any, path: str, letters: Sequence[str]) -> list[frozenset]:
    if not isinstance(doc, list):
        raise InvalidModel(f"{path}: expected a list of rows")
    rows = []
    for i, row in enumerate(doc):
        where = f"{path}[{i}]"
        if not isinstance(row, Mapping):
            raise InvalidModel(f"{where}: expected an object mapping letters to booleans")
        missing = [x for x in letters if x not in row]
        if missing:
            raise InvalidModel(f"{where}: missing letters {missing}")
        extra = [x for x in row if x not in letters]
        if extra:
            raise InvalidModel(f"{where}: undeclared letters {extra}")
        for x in letters:
            if not isinstance(row[x], bool):
                raise InvalidModel(f"{where}.{x}: expected true or false")
        rows.append(frozenset(x for x in letters if row[x]))
    return rows


def model_from_json(doc: Any, path: str = "$") -> PeriodicModel:
    if not isinstance(doc, Mapping):
        raise InvalidModel(f"{path}: expected an object")
    for key in ("letters", "bound", "loop"):
        if key not in doc:
            raise InvalidModel(f"{path}.{key}: required")
    letters = doc["letters"]
    if not isinstance(letters, list) or not all(isinstance(x, str) for x in letters):
        raise InvalidModel(f"{path}.letters: expected a list of strings")
    if len(set(letters)) != len(letters):
        raise InvalidModel(f"{path}.letters: duplicate letters")
    bound_doc = doc["bound"]
    try:
        if isinstance(bound_doc, Mapping) and set(bound_doc) == {"uniform"}:
            bound: Bound = Uniform(bound_doc["uniform"])
        elif isinstance(bound_doc, Mapping) and set(bound_doc) == {"window_prefix", "window_loop"}:
            bound = NonUniform(tuple(bound_doc["window_prefix"]), tuple(bound_doc["window_loop"]))
        else:
            raise InvalidModel("expected {\"uniform\": m} or {\"window_prefix\": [...], \"window_loop\": [...]}")
    except (InvalidModel, TypeError) as exc:
        raise InvalidModel(f"{path}.bound: {exc}") from None
    prefix = _parse_rows(doc.get("prefix", []), f"{path}.prefix", letters)
    loop = _parse_rows(doc["loop"], f"{path}.loop", letters)
    if not loop:
        raise InvalidModel(f"{path}.loop: must be nonempty")
    return PeriodicModel(tuple(letters), tuple(prefix), tuple(loop), bound)


def load_model(path: str) -> PeriodicModel:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidModel(f"{path}: {exc}") from None
    return model_from_json(doc)
