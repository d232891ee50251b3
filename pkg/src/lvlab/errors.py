"""Exception types shared by every module; the CLI maps them to exit codes."""


class LvlabError(Exception):
    exit_code = 1


class InvalidInputError(LvlabError, ValueError):
    exit_code = 2


class BudgetExceededError(LvlabError):
    exit_code = 3


class NonConvergenceError(LvlabError, ArithmeticError):
    exit_code = 1


class BoundaryZeroError(NonConvergenceError):
    """L vanishes (numerically) on the counting contour."""
