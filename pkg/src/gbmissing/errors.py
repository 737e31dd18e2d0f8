"""Exception hierarchy shared by every module.

The CLI maps :class:`DomainError` to exit status 1 and
:class:`ResourceLimitError` / :class:`NumericError` / :class:`FormatError`
to exit status 2.
"""


class GBError(Exception):
    """Base class for all package errors."""

    kind = "error"


class DomainError(GBError, ValueError):
    """An argument violates an operation's precondition."""

    kind = "domain"


class ResourceLimitError(GBError):
    """A size cap (sieve limit, DP state, transform length...) was exceeded."""

    kind = "resource"


class NumericError(GBError, ArithmeticError):
    """Quadrature or another numerical procedure failed to converge."""

    kind = "numeric"


class FormatError(GBError):
    """A cache or report file is malformed."""

    kind = "format"


class LemmaCounterexample(GBError):
    """A constructive search found no witness although the hypothesis held."""

    kind = "counterexample"
