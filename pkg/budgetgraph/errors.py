"""Exception types raised by budgetgraph."""


class BudgetGraphError(Exception):
    """Base class for all budgetgraph errors."""


class ParameterError(BudgetGraphError, ValueError):
    """A precondition on the inputs of an operation does not hold."""


class ConfigError(ParameterError):
    """
    An experiment config failed to parse or validate.

    Args:
        field: Dotted name of the failing field, e.g. ``process.n``
        message: Human readable reason
    """

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class CapacityError(BudgetGraphError):
    """A search or enumeration would exceed its cap; this is not a "no"."""


class StrategyContractError(BudgetGraphError):
    """A strategy returned something the process model does not allow."""


class ConstructionError(BudgetGraphError):
    """An internal invariant was violated. Always a bug upstream."""
