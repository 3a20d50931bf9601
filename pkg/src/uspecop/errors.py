"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: configuration and syntax problems are
usage errors (2) and cap violations are resource errors (3).
"""


class UspecError(Exception):
    """Base class for all package errors."""


class ConfigError(UspecError):
    """Ill-formed input: unknown stage, missing table, arity mismatch, ..."""


class UspecSyntaxError(ConfigError):
    """Parse failure with a 1-based source position."""

    def __init__(self, message: str, line: int, column: int, source: str = "<input>"):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(f"{source}:{line}:{column}: {message}")


class CapExceeded(UspecError):
    """A configured enumeration or automaton cap would be exceeded."""


class NotAnExecution(UspecError):
    """A cyclic graph was offered where an execution was expected."""


class UnsupportedAxiom(ConfigError):
    """The requested procedure does not apply to this axiom shape."""
