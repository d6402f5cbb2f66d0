"""Exception types shared across the toolkit.

The CLI maps ValidationError to exit code 2 and BudgetError /
CertificationError to exit code 3.
"""


class ValidationError(ValueError):
    """A precondition on user-supplied parameters is violated."""


class BudgetError(RuntimeError):
    """A computation would exceed its configured budget.

    Carries the budget that would be required so callers can rerun with an
    explicit larger budget.
    """

    def __init__(self, message, required=None, budget=None):
        super().__init__(message)
        self.required = required
        self.budget = budget


class CertificationError(RuntimeError):
    """A curvature / arc certification failed (e.g. sign change on the grid)."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
