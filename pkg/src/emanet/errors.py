"""Exception types raised across the package."""


class EmanetError(Exception):
    """Base class for all package errors."""


class DuplicatePoint(EmanetError):
    """Two input points share the same coordinates (or a point is compared with itself)."""


class ModeUnsupported(EmanetError):
    """The requested grade is not available in the requested arithmetic mode."""


class InternalInvariantViolation(EmanetError):
    """A construction produced a state its own invariants rule out."""


class EmptyGraph(EmanetError):
    pass


class DegenerateInput(UserWarning):
    """Input too degenerate for the requested structure; a fallback was returned."""


class ParseError(EmanetError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(EmanetError):
    pass
