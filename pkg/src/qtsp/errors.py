"""Exception hierarchy shared by all modules."""


class QtspError(Exception):
    """Base class for every error raised by the package."""


class DegenerateGeometryError(QtspError):
    """A transition cost was requested for a zero-length direction vector."""


class InvalidTourError(QtspError):
    """A tour or path does not fit the instance."""


class InstanceFormatError(QtspError):
    """Malformed instance text. ``line`` is 1-based."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicatePointError(InstanceFormatError):
    """Two points of one instance share their coordinates."""


class ParameterError(QtspError, ValueError):
    """A numeric parameter lies outside its admissible range."""
