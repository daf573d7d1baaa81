"""
Error types raised by the service layer.
Checkers return (ok, details) tuples; builders and solvers raise these.
"""


class LiftGapError(Exception):
    """Base class for every domain error."""


class InvalidInstanceError(LiftGapError):
    pass


class MalformedLPError(LiftGapError):
    pass


class InfeasibleInputError(LiftGapError):
    pass


class BudgetExceededError(LiftGapError):
    """An enumeration would exceed its configured budget."""

    def __init__(self, what: str, count: int, budget: int):
        self.what = what
        self.count = count
        self.budget = budget
        super().__init__(f"{what}: {count} exceeds budget {budget}")


class DepthBudgetError(BudgetExceededError):
    pass


class IntegralVariableError(LiftGapError):
    """A witness was requested for an integral variable outside the forced cases."""


class MissingWitnessError(LiftGapError):
    pass


class ProjectionMismatchError(LiftGapError):
    def __init__(self, coordinate: str, expected, actual):
        self.coordinate = coordinate
        self.expected = expected
        self.actual = actual
        super().__init__(f"{coordinate}: expected {expected}, got {actual}")


def check_budget(what: str, count: int, budget: int, depth: bool = False) -> None:
    if count > budget:
        raise (DepthBudgetError if depth else BudgetExceededError)(what, count, budget)
