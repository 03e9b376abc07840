"""Exception types shared across the package."""


class LalogicError(Exception):
    """Base class for package errors."""


class ParseError(LalogicError):
    """Syntax error in a term/formula/file, with a position."""

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class FragmentError(LalogicError):
    """Expression lies outside the fragment required by an operation."""


class NotPreorder(LalogicError):
    """Structure's universal relation is not reflexive and transitive."""


class BudgetExceeded(LalogicError):
    """A caller-supplied enumeration budget was exhausted."""


class StateBudgetExceeded(LalogicError):
    """Automaton state/alphabet/subset-exploration cap was exceeded."""
