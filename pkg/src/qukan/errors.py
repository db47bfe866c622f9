"""Exception types shared across the package.

The CLI maps each class to a distinct exit code, so raise the most
specific one that applies.
"""


class QukanError(Exception):
    """Base class for all package errors."""


class DomainError(QukanError, ValueError):
    """An argument is outside the valid domain of an operation."""


class ConfigurationError(QukanError, ValueError):
    """A configuration or model setup is internally inconsistent."""


class TrainingError(QukanError, RuntimeError):
    """Training diverged or could not proceed."""


class ParseError(QukanError, ValueError):
    """A data or config file could not be parsed."""


class ArtifactError(QukanError, FileNotFoundError):
    """A required input file or checkpoint is missing."""
