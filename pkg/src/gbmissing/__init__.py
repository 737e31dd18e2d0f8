"""Numerical experiments around Goldbach numbers in short intervals with a missing digit."""

__version__ = "0.1.0"

from .errors import DomainError, FormatError, GBError, LemmaCounterexample, NumericError, ResourceLimitError
from .kernels import BACKEND

__all__ = [
    "__version__",
    "BACKEND",
    "GBError",
    "DomainError",
    "FormatError",
    "LemmaCounterexample",
    "NumericError",
    "ResourceLimitError",
]
