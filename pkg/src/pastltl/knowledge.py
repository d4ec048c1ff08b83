"""Multi-agent knowledge: voted valuations and per-agent conflict resolution.

Every agent carries its own valuation over one shared frame.  Voting merges
them into a single model in which a letter holds wherever at least
``threshold`` agents say so; the knowledge operators ``K1``, ``K2`` and
``K[psi]`` are then evaluated on that model as usual.  Shared knowledge
``K[psi] phi`` instead requires ``phi S psi`` under every agent's own valuation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Optional, Sequence

from .errors import IncompatibleAgents, InvalidModel, NestedKnowledgeUnsupported
from .semantics import PeriodicModel, eval_formula, model_from_json, model_to_json
from .syntax import K1, K2, Formula, KPar, Since, subformulas


def majority(n_agents: int) -> int:
    return n_agents // 2 + 1


@dataclass(frozen=True)
class AgentProfile:
    agents: tuple[PeriodicModel, ...]
    threshold: int

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        if not self.agents:
            raise IncompatibleAgents("agents: at least one agent is required")
        first = self.agents[0]
        for i, a in enumerate(self.agents[1:], start=1):
            if a.letters != first.letters:
                raise IncompatibleAgents(f"agents[{i}].letters: differs from agents[0]")
            if a.bound != first.bound:
                raise IncompatibleAgents(f"agents[{i}].bound: differs from agents[0]")
            if len(a.prefix) != len(first.prefix) or len(a.loop) != len(first.loop):
                raise IncompatibleAgents(f"agents[{i}]: prefix/loop lengths differ from agents[0]")
        if not isinstance(self.threshold, int) or not 1 <= self.threshold <= len(self.agents):
            raise IncompatibleAgents(
                f"threshold: must lie in 1..{len(self.agents)}, got {self.threshold!r}")

    @classmethod
    def with_majority(cls, agents: Sequence[PeriodicModel]) -> "AgentProfile":
        return cls(tuple(agents), majority(len(agents)))


def vote_model(p: AgentProfile) -> PeriodicModel:
    first = p.agents[0]

    def voted(rows: Sequence[frozenset]) -> frozenset:
        return frozenset(x for x in first.letters
                         if sum(x in r for r in rows) >= p.threshold)

    prefix = tuple(voted([a.prefix[i] for a in p.agents]) for i in range(len(first.prefix)))
    loop = tuple(voted([a.loop[i] for a in p.agents]) for i in range(len(first.loop)))
    return PeriodicModel(first.letters, prefix, loop, first.bound)


def eval_voted_knowledge(p: AgentProfile, f: Formula, a: int) -> bool:
    return eval_formula(vote_model(p), f, a)


def _reject_nested(f: Formula, where: str) -> None:
    if any(isinstance(g, (K1, K2, KPar)) for g in subformulas(f)):
        raise NestedKnowledgeUnsupported(
            f"{where}: knowledge operators nested inside shared knowledge are not supported")


def eval_shared_knowledge(p: AgentProfile, psi: Formula, phi: Formula, a: int) -> bool:
    """``K[psi] phi`` read as: every agent's own valuation satisfies ``phi S psi`` at ``a``."""
    _reject_nested(psi, "psi")
    _reject_nested(phi, "phi")
    return all(eval_formula(agent, Since(phi, psi), a) for agent in p.agents)


def profile_to_json(p: AgentProfile) -> dict[str, Any]:
    return {"threshold": p.threshold, "agents": [model_to_json(a) for a in p.agents]}


def profile_from_json(doc: Any) -> AgentProfile:
    if not isinstance(doc, dict):
        raise InvalidModel("$: expected an object")
    agents_doc = doc.get("agents")
    if not isinstance(agents_doc, list) or not agents_doc:
        raise InvalidModel("$.agents: expected a nonempty list of models")
    agents = [model_from_json(a, f"$.agents[{i}]") for i, a in enumerate(agents_doc)]
    threshold: Optional[int] = doc.get("threshold")
    if threshold is None:
        threshold = majority(len(agents))
    return AgentProfile(tuple(agents), threshold)


def load_profile(path: str) -> AgentProfile:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidModel(f"{path}: {exc}") from None
    return profile_from_json(doc)
