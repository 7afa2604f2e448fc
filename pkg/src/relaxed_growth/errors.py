"""Exception hierarchy shared by the solver modules and the CLI."""


class RelaxedGrowthError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(RelaxedGrowthError, ValueError):
    """An input violates a documented invariant (the message names it)."""


class DomainError(InvalidParameterError):
    """A function was evaluated outside its admissible domain."""


class SingularCaseError(RelaxedGrowthError):
    """The requested formula is undefined for these inputs (e.g. Merton ratio 1/2 with costs)."""


class NoRootError(RelaxedGrowthError):
    """A bracketed root search found no sign change."""


class InfeasibleBudgetError(RelaxedGrowthError):
    """No boundary policy attains the requested average time between trades."""
