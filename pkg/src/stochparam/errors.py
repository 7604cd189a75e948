"""Exception types shared across the package.

The CLI maps these onto exit statuses: invalid arguments exit with 1,
resource limits with 2 and failed experiment checks with 3.
"""


class InvalidArgument(ValueError):
    """A precondition on an argument was violated."""


class ResourceLimit(RuntimeError):
    """A computation would exceed a configured resource ceiling."""


class ExperimentFailure(AssertionError):
    """An experiment's declared pass/fail check did not hold."""
