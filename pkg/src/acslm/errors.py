"""Exception hierarchy shared by all modules.

Exit-code mapping used by the CLI: ValidationError -> 2, NumericError -> 3,
InternalConsistencyError -> 4.
"""


class AcslmError(Exception):
    """Base class for all library errors."""


class ValidationError(AcslmError, ValueError):
    """Bad user input: malformed mesh/complex/manifest, precondition violation."""


class WeightError(ValidationError):
    """A weight is exceptional or outside its supported window.

    Carries the offending value so callers can name it in diagnostics.
    """

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class ResourceLimitError(AcslmError, RuntimeError):
    """A computation would exceed a configured resource cap."""


class NumericError(AcslmError, RuntimeError):
    """A numerical routine failed to converge or lost accuracy.

    ``diagnostics`` holds solver state useful for debugging (iteration
    counts, mode ids, truncated state dumps).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InternalConsistencyError(AcslmError, RuntimeError):
    """A cross-check that must hold by theory failed: signals a bug, not bad input."""
