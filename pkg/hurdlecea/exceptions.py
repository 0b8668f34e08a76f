"""
Exception hierarchy for the hurdle cost-effectiveness toolkit.
"""
from typing import Iterable, List, Optional


class HurdleCEAError(Exception):
    """Base class for every error raised by hurdlecea."""


class ConfigurationError(HurdleCEAError):
    """Invalid run configuration or model specification."""


class DataValidationError(HurdleCEAError):
    """Input data violates the dataset contract."""

    def __init__(self, message: str, row: Optional[int] = None, line: Optional[int] = None):
        super().__init__(message)
        self.row = row
        self.line = line


class ModelDomainError(HurdleCEAError, ValueError):
    """An argument lies outside the domain of a model function."""


class DimensionMismatchError(HurdleCEAError, ValueError):
    pass


class UnsupportedDataError(HurdleCEAError):
    """Data is valid but cannot identify the configured model."""


class InitializationError(HurdleCEAError):
    """No finite starting point was found for a chain."""


class DiagnosticError(HurdleCEAError):
    """A diagnostic is undefined for the given input."""


class DegenerateConfigurationError(HurdleCEAError):
    """The fitted configuration yields an impossible likelihood at the posterior mean."""


class UnknownParameterError(HurdleCEAError, KeyError):
    def __init__(self, name: str, available: Iterable[str]):
        self.name = name
        self.available = list(available)
        super().__init__(
            f"Unknown parameter '{name}'. Available: {', '.join(self.available)}"
        )

    def __str__(self) -> str:
        return self.args[0]


class DrawsSchemaError(HurdleCEAError):
    def __init__(self, missing: Iterable[str], source: str = "draws"):
        self.missing = sorted(missing)
        super().__init__(f"{source} is missing required columns: {', '.join(self.missing)}")


class PipelineError(HurdleCEAError):
    """Raised when a workflow finishes with stage errors."""

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors) or "pipeline failed")
