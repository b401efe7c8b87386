class CCSPError(Exception):
    """Base class for library errors."""


class ArgumentError(CCSPError, ValueError):
    """Malformed input or an operation applied outside its domain."""


class PreconditionError(CCSPError):
    """Input is well formed but violates an operation's precondition."""


class ResourceLimitError(CCSPError):
    """A configurable search or enumeration cap was exceeded."""


class InvariantError(CCSPError, AssertionError):
    """An internal invariant failed; indicates a bug upstream."""


class FormatError(ArgumentError):
    """A language, instance or vector file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)
