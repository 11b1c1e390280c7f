"""Exception hierarchy shared by the library and the CLI."""


class InvPersError(Exception):
    """Base class for all library errors."""


class StructuralError(InvPersError, ValueError):
    """Input has the wrong shape (non-square matrix, foreign subset, ...)."""


class InputError(InvPersError, ValueError):
    """A file or generator string could not be parsed."""


class ValidationError(InvPersError, ValueError):
    """A schedule or approximation failed a required inequality."""


class PreconditionError(InvPersError, ValueError):
    """An operation was called outside its domain."""


class ResourceLimitError(InvPersError, RuntimeError):
    """A construction would exceed the configured simplex ceiling."""


class CapViolationError(ResourceLimitError):
    """A size cap truncated an element that a map needs to hit."""

    def __init__(self, message, required_cap=None):
        super().__init__(message)
        self.required_cap = required_cap


class InternalConsistencyError(InvPersError, AssertionError):
    """A mathematical guarantee failed; indicates a bug or a broken schedule."""
