class QfaError(ValueError):
    """Base class for data errors raised by the toolkit"""


class DimensionError(QfaError):
    """Operands have incompatible shapes"""


class UnknownSymbolError(QfaError):
    """A word uses a symbol outside the automaton's alphabet"""


class ValidationError(QfaError):
    """An automaton or instance violates its type invariants"""

    def __init__(self, message: str, violations=None):
        super().__init__(message)
        self.violations = list(violations or [])


class ReducedWordError(QfaError):
    """A signed word contains an adjacent letter/inverse pair"""


class FormatError(QfaError):
    """A JSON artifact or literal could not be parsed"""
