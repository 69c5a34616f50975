"""Numerical experiments with twisted L-functions of elliptic curves and Artin representations."""

from .errors import (
    ArtinLFError,
    ComputationError,
    CutoffError,
    DomainError,
    MissingDataError,
    TableFormatError,
)

__version__ = "0.1.0"
