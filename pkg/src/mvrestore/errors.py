"""Exception types raised across the package."""


class ValidationError(ValueError):
    """An input violates a documented precondition."""


class ParseError(ValidationError):
    """A text record could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ManifestError(ValidationError):
    """A batch manifest is malformed, inconsistent or references missing files."""


class ContractViolation(RuntimeError):
    """A restorer returned output that breaks the batch contract."""
