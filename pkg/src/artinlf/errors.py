"""Exception hierarchy.

Validation problems (bad inputs, unsupported configurations) derive from
``ValueError``; numerical failures derive from ``ArithmeticError``.  The CLI
maps the former to exit code 3 and the latter to exit code 4.
"""


class ArtinLFError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ArtinLFError, ValueError):
    """An argument lies outside the supported domain of an operation."""


class GammaPoleError(DomainError):
    """Gamma function evaluated at a non-positive integer."""


class UnsupportedModulusError(DomainError):
    """Characters modulo powers of 2 are not supported."""


class UnsupportedConfigurationError(DomainError):
    """Bad reduction or ramification collision where the theory is silent."""


class MissingDataError(DomainError):
    """External representation data lacks something the operation needs."""


class TableFormatError(DomainError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ComputationError(ArtinLFError, ArithmeticError):
    """A numerical procedure failed to reach its target accuracy."""


class ConvergenceError(ComputationError):
    pass


class CutoffError(ComputationError):
    """A coefficient table is too short for the requested truncation."""

    def __init__(self, required, available):
        self.required = int(required)
        self.available = int(available)
        super().__init__(
            f"coefficient cutoff {self.available} is insufficient; need X >= {self.required}"
        )


class RootNumberError(ComputationError):
    """Two-point root number solve was ill-conditioned or gave |w| != 1."""
