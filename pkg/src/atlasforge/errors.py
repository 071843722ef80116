"""Exception hierarchy shared by every module."""


class AtlasForgeError(Exception):
    """Base class; the CLI maps subclasses to exit codes."""


class MalformedInput(AtlasForgeError):
    """Structurally invalid data: non-total maps, non-opens, dangling names."""


class PreconditionError(AtlasForgeError):
    """Well-formed input that violates an operation's precondition."""


class BudgetExceeded(AtlasForgeError):
    """An enumeration hit its configured cap before finishing."""

    def __init__(self, what: str, budget: int):
        super().__init__(f"search-budget exceeded while enumerating {what} (cap {budget})")
        self.what = what
        self.budget = budget


class CompositionUndefined(AtlasForgeError):
    """Composite requested outside the conditions under which it is defined."""


class ConsistencyError(AtlasForgeError):
    """Internal cross-check disagreed; indicates a bug or corrupted input."""


class EvaluationError(AtlasForgeError):
    """Numeric evaluation produced NaN or infinity."""
