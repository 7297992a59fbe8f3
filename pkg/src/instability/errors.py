"""Exception hierarchy shared by the whole package.

The CLI maps these onto distinct exit codes, so library code should raise
the most specific class that applies.
"""


class InstabilityError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ParseError(InstabilityError):
    """Malformed input files or JSON payloads."""

    exit_code = 1


class ValidationError(InstabilityError):
    """Inputs violate a documented invariant (shape, positivity, range...)."""

    exit_code = 2


class SolverError(InstabilityError):
    """A numerical routine failed to reach its accuracy contract."""

    exit_code = 3


class BudgetError(InstabilityError):
    """A computation was refused because it exceeds a size/evaluation budget."""

    exit_code = 4
