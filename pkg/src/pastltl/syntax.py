"""Formula and rule syntax: AST, parser, printer, substitution.

Grammar (loosest to tightest binding)::

    formula := impl
    impl    := or ("->" impl)?
    or      := and ("|" and)*
    and     := since ("&" since)*
    since   := unary ("S" unary)*
    unary   := "~" unary | "N" unary | "[]" unary | "<>" unary
             | "K1" unary | "K2" unary | "K[" formula "]" unary
             | atom | "true" | "false" | "(" formula ")"
    rule    := formula ("," formula)* "/" formula

``S`` is the bounded, past-directed Since; ``N`` steps one position further
into the past.  ``[]``, ``<>``, ``K1``, ``K2`` and ``K[psi]`` are derived and
disappear under :func:`expand_derived`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Iterator, Mapping, Union

from .errors import EmptyPremises, FormulaSyntaxError, UnknownOperator

__all__ = [
    "Formula", "Atom", "Top", "Bottom", "Not", "And", "Or", "Implies", "Next",
    "Since", "Box", "Diamond", "K1", "K2", "KPar", "Rule", "Substitution",
    "TOP", "BOTTOM", "parse_formula", "parse_rule", "render", "expand_derived",
    "apply_substitution", "temporal_reach", "atoms", "subformulas", "is_core",
    "conj", "disj", "iff", "height", "size", "compose",
]


class Formula:
    """Base class of all formula nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True, slots=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True, slots=True)
class Top(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Next(Formula):
    child: Formula


@dataclass(frozen=True, slots=True)
class Since(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Box(Formula):
    child: Formula


@dataclass(frozen=True, slots=True)
class Diamond(Formula):
    child: Formula


@dataclass(frozen=True, slots=True)
class K1(Formula):
    child: Formula


@dataclass(frozen=True, slots=True)
class K2(Formula):
    child: Formula


@dataclass(frozen=True, slots=True)
class KPar(Formula):
    """Parameterized knowledge: ``K[param] child`` means ``child S param``."""

    param: Formula
    child: Formula


TOP = Top()
BOTTOM = Bottom()

Substitution = Mapping[str, Formula]

_UNARY = (Not, Next, Box, Diamond, K1, K2)
_BINARY = (And, Or, Implies, Since)
_CORE = (Atom, Top, Bottom, Not, And, Or, Implies, Next, Since)
_DERIVED = (Box, Diamond, K1, K2, KPar)


@dataclass(frozen=True)
class Rule:
    premises: tuple[Formula, ...]
    conclusion: Formula

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))
        if not self.premises:
            raise ValueError("a rule needs at least one premise")

    @property
    def variables(self) -> frozenset[str]:
        names: set[str] = set()
        for f in (*self.premises, self.conclusion):
            names |= atoms(f)
        return frozenset(names)

    def __str__(self) -> str:
        return render(self)


# ---------------------------------------------------------------- traversal

def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Atom, Top, Bottom)):
        return ()
    if isinstance(f, _UNARY):
        return (f.child,)
    if isinstance(f, KPar):
        return (f.param, f.child)
    return (f.left, f.right)


def subformulas(f: Formula) -> list[Formula]:
    """Distinct subformulas in post-order (children before parents)."""
    seen: dict[Formula, None] = {}

    def walk(g: Formula) -> None:
        if g in seen:
            return
        for c in children(g):
            walk(c)
        seen[g] = None

    walk(f)
    return list(seen)


def atoms(f: Formula) -> frozenset[str]:
    return frozenset(g.name for g in subformulas(f) if isinstance(g, Atom))


def is_core(f: Formula) -> bool:
    return all(isinstance(g, _CORE) for g in subformulas(f))


def height(f: Formula) -> int:
    cs = children(f)
    return 0 if not cs else 1 + max(height(c) for c in cs)


def size(f: Formula) -> int:
    """Number of connectives (leaves count zero)."""
    return sum(1 for g in _nodes(f) if children(g))


def _nodes(f: Formula) -> Iterator[Formula]:
    yield f
    for c in children(f):
        yield from _nodes(c)


def _fold(op, fs: list[Formula], balanced: bool) -> Formula:
    if not balanced or len(fs) <= 2:
        return reduce(op, fs)
    mid = len(fs) // 2
    return op(_fold(op, fs[:mid], True), _fold(op, fs[mid:], True))


def conj(fs: Iterable[Formula], balanced: bool = False) -> Formula:
    """Conjunction of ``fs``; ``balanced`` keeps the tree shallow for long lists."""
    fs = list(fs)
    return _fold(And, fs, balanced) if fs else TOP


def disj(fs: Iterable[Formula], balanced: bool = False) -> Formula:
    fs = list(fs)
    return _fold(Or, fs, balanced) if fs else BOTTOM


def iff(a: Formula, b: Formula) -> Formula:
    return And(Implies(a, b), Implies(b, a))


# ---------------------------------------------------------------- rewriting

def expand_derived(f: Formula) -> Formula:
    """Rewrite every derived operator into Not/And/Or/Implies/Next/Since."""
    if isinstance(f, (Atom, Top, Bottom)):
        return f
    if isinstance(f, K1):
        c = expand_derived(f.child)
        return Since(c, c)
    if isinstance(f, (K2, Box)):
        return Not(Since(TOP, Not(expand_derived(f.child))))
    if isinstance(f, Diamond):
        return Since(TOP, expand_derived(f.child))
    if isinstance(f, KPar):
        return Since(expand_derived(f.child), expand_derived(f.param))
    if isinstance(f, (Not, Next)):
        return type(f)(expand_derived(f.child))
    return type(f)(expand_derived(f.left), expand_derived(f.right))


def apply_substitution(f: Formula, s: Substitution) -> Formula:
    """Replace every atom in the domain of ``s`` simultaneously."""
    if not s:
        return f
    if isinstance(f, Atom):
        return s.get(f.name, f)
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, _UNARY):
        return type(f)(apply_substitution(f.child, s))
    if isinstance(f, KPar):
        return KPar(apply_substitution(f.param, s), apply_substitution(f.child, s))
    return type(f)(apply_substitution(f.left, s), apply_substitution(f.right, s))


def compose(s1: Substitution, s2: Substitution) -> dict[str, Formula]:
    """The substitution ``s2 . s1``: apply ``s1`` first, then ``s2``."""
    out = {x: apply_substitution(g, s2) for x, g in s1.items()}
    for x, g in s2.items():
        out.setdefault(x, g)
    return out


def temporal_reach(f: Formula, m: int) -> int:
    """How many positions past the evaluation point the truth of ``f`` can depend on."""
    if isinstance(f, (Atom, Top, Bottom)):
        return 0
    if isinstance(f, Not):
        return temporal_reach(f.child, m)
    if isinstance(f, Next):
        return 1 + temporal_reach(f.child, m)
    if isinstance(f, Since):
        return m + max(temporal_reach(f.left, m), temporal_reach(f.right, m))
    if isinstance(f, (And, Or, Implies)):
        return max(temporal_reach(f.left, m), temporal_reach(f.right, m))
    return temporal_reach(expand_derived(f), m)


# ---------------------------------------------------------------- printing

_PREC = {Implies: 1, Or: 2, And: 3, Since: 4}
_BIN_SYMBOL = {Implies: "->", Or: "|", And: "&", Since: "S"}


def _prec(f: Formula) -> int:
    return _PREC.get(type(f), 5)


def _wrap(f: Formula, min_prec: int) -> str:
    text = _render_formula(f)
    return f"({text})" if _prec(f) < min_prec else text


def _render_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Not):
        return "~" + _wrap(f.child, 5)
    if isinstance(f, Box):
        return "[]" + _wrap(f.child, 5)
    if isinstance(f, Diamond):
        return "<>" + _wrap(f.child, 5)
    if isinstance(f, Next):
        return "N " + _wrap(f.child, 5)
    if isinstance(f, K1):
        return "K1 " + _wrap(f.child, 5)
    if isinstance(f, K2):
        return "K2 " + _wrap(f.child, 5)
    if isinstance(f, KPar):
        return f"K[{_render_formula(f.param)}] " + _wrap(f.child, 5)
    p = _PREC[type(f)]
    if isinstance(f, Implies):
        left, right = _wrap(f.left, p + 1), _wrap(f.right, p)
    else:
        left, right = _wrap(f.left, p), _wrap(f.right, p + 1)
    return f"{left} {_BIN_SYMBOL[type(f)]} {right}"


def render(obj: Union[Formula, Rule]) -> str:
    if isinstance(obj, Rule):
        return ", ".join(_render_formula(p) for p in obj.premises) + " / " + \
            _render_formula(obj.conclusion)
    return _render_formula(obj)


# ---------------------------------------------------------------- parsing

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<op>->|\[\]|<>|K\[|K1|K2|[~&|()\],/])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<bad>.)
""", re.VERBOSE)

_ATOM_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
_PREFIX = {"~": Not, "N": Next, "[]": Box, "<>": Diamond, "K1": K1, "K2": K2}
_UNARY_START = frozenset({"~", "N", "[]", "<>", "K1", "K2", "K[", "(", "true",
                          "false", "<atom>"})


@dataclass(frozen=True, slots=True)
class _Tok:
    kind: str  # "op", "atom", "kw", "end"
    value: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    for mo in _TOKEN_RE.finditer(text):
        kind, value, pos = mo.lastgroup, mo.group(), mo.start()
        if kind == "ws":
            continue
        if kind == "bad":
            raise FormulaSyntaxError(f"unexpected character {value!r}", text, pos)
        if kind == "ident":
            if value in ("S", "N"):
                toks.append(_Tok("op", value, pos))
            elif value in ("true", "false"):
                toks.append(_Tok("kw", value, pos))
            elif _ATOM_RE.match(value):
                toks.append(_Tok("atom", value, pos))
            elif value[0].isupper():
                raise UnknownOperator(f"unknown operator {value!r}", text, pos)
            else:
                raise FormulaSyntaxError(f"invalid atom name {value!r}", text, pos)
            continue
        toks.append(_Tok("op", value, pos))
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def at(self, value: str) -> bool:
        return self.tok.kind == "op" and self.tok.value == value

    def fail(self, expected: Iterable[str]) -> FormulaSyntaxError:
        t = self.tok
        found = "end of input" if t.kind == "end" else repr(t.value)
        return FormulaSyntaxError(f"unexpected {found}", self.text, t.pos,
                                  frozenset(expected))

    def expect(self, value: str) -> None:
        if not self.at(value):
            raise self.fail({value})
        self.i += 1

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.at("->"):
            self.i += 1
            return Implies(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.at("|"):
            self.i += 1
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.since()
        while self.at("&"):
            self.i += 1
            f = And(f, self.since())
        return f

    def since(self) -> Formula:
        f = self.unary()
        while self.at("S"):
            self.i += 1
            f = Since(f, self.unary())
        return f

    def unary(self) -> Formula:
        t = self.tok
        if t.kind == "atom":
            self.i += 1
            return Atom(t.value)
        if t.kind == "kw":
            self.i += 1
            return TOP if t.value == "true" else BOTTOM
        if t.kind == "op":
            if t.value in _PREFIX:
                self.i += 1
                return _PREFIX[t.value](self.unary())
            if t.value == "K[":
                self.i += 1
                param = self.formula()
                self.expect("]")
                return KPar(param, self.unary())
            if t.value == "(":
                self.i += 1
                f = self.formula()
                self.expect(")")
                return f
        raise self.fail(_UNARY_START)

    def end(self, allowed: Iterable[str] = ()) -> None:
        if self.tok.kind != "end":
            raise self.fail({"end of input", "S", "&", "|", "->", *allowed})


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    p.end()
    return f


def parse_rule(text: str) -> Rule:
    p = _Parser(text)
    if p.at("/"):
        raise EmptyPremises("rule has no premises", text, p.tok.pos)
    premises = [p.formula()]
    while p.at(","):
        p.i += 1
        premises.append(p.formula())
    if not p.at("/"):
        raise p.fail({"/", ",", "S", "&", "|", "->"})
    p.i += 1
    conclusion = p.formula()
    p.end()
    return Rule(tuple(premises), conclusion)
