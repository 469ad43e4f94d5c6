"""Exception types shared across the package."""


class PmetricError(Exception):
    """Base class for all errors raised by this package."""


class ModelError(PmetricError):
    """A model file is syntactically or semantically invalid."""

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class FormulaError(PmetricError):
    """A formula is syntactically invalid or violates its sort."""

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class BudgetExceededError(PmetricError):
    """A bounded search (enumeration or graph exploration) hit its cap.

    ``best`` carries the best value found before the cap, when meaningful.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
