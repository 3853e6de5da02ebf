"""Exception types shared across the package.

Two failure families map onto the CLI exit codes: configuration/input
problems (exit 1) and contract/domain violations (exit 2).
"""


class ConfigError(Exception):
    """Invalid or malformed run configuration; message names the offending key."""


class ContractError(Exception):
    """A documented precondition or domain restriction was violated."""


class BudgetExceededError(ContractError):
    """Quadrature sample budget exceeded.

    Carries the estimated number of samples the request would need so the
    caller can raise the budget deliberately instead of waiting forever.
    """

    def __init__(self, required, budget):
        self.required = int(required)
        self.budget = int(budget)
        super().__init__(
            f"quadrature needs about {self.required} samples, over the budget "
            f"of {self.budget}; raise QuadratureSpec.budget (or RIS_BUDGET) to proceed"
        )
