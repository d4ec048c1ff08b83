"""Exception hierarchy shared by every module of the toolkit."""

from __future__ import annotations


class PastLtlError(Exception):
    """Base class for all toolkit errors."""


class FormulaSyntaxError(PastLtlError, SyntaxError):
    """Malformed formula or rule text.

    ``line`` and ``column`` are 1-based; ``expected`` is the set of tokens
    that would have been accepted at the failure point.
    """

    def __init__(self, message: str, text: str = "", pos: int = 0,
                 expected: frozenset[str] = frozenset()):
        line = text.count("\n", 0, pos) + 1
        column = pos - (text.rfind("\n", 0, pos) + 1) + 1
        self.line = line
        self.column = column
        self.expected = frozenset(expected)
        detail = message
        if self.expected:
            detail += " (expected one of: " + ", ".join(sorted(self.expected)) + ")"
        super().__init__(f"{detail} at line {line}, column {column}")


class UnknownOperator(FormulaSyntaxError):
    pass


class EmptyPremises(FormulaSyntaxError):
    pass


class UnknownAtom(PastLtlError, KeyError):
    def __str__(self) -> str:
        return self.args[0] if self.args else "unknown atom"


class InvalidModel(PastLtlError, ValueError):
    """A model or profile document violates its schema; message is path-qualified."""


class NonUniformShift(PastLtlError, ValueError):
    pass


class CapacityExceeded(PastLtlError, RuntimeError):
    """A configured size limit would be exceeded.

    ``required`` is the theoretical size that triggered the refusal, ``limit``
    the configured budget.
    """

    def __init__(self, what: str, required: int, limit: int):
        self.what = what
        self.required = required
        self.limit = limit
        super().__init__(f"{what}: {required} exceeds budget {limit}")


class IncompatibleAgents(InvalidModel):
    pass


class NestedKnowledgeUnsupported(PastLtlError, ValueError):
    pass
