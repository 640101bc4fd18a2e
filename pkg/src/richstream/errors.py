"""Exception hierarchy; each class carries the CLI exit code it maps to."""


class RichStreamError(Exception):
    exit_code = 1


class ParseError(RichStreamError, ValueError):
    exit_code = 2

    def __init__(self, message: str, lineno: int | None = None):
        super().__init__(message)
        self.lineno = lineno


class ConfigError(RichStreamError, ValueError):
    exit_code = 3


class DomainError(RichStreamError, ValueError):
    exit_code = 3


class ConsistencyError(RichStreamError, RuntimeError):
    """Internal invariant broken; signals a bug upstream rather than bad input."""

    exit_code = 4


class MissingArtifactError(RichStreamError, FileNotFoundError):
    exit_code = 5
