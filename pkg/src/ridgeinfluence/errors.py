"""Exception hierarchy.

Input problems (bad files, bad arguments) derive from :class:`InputError`;
failures of the numerics derive from :class:`NumericalError`. The CLI maps the
two families to distinct exit codes.
"""


class RidgeInfluenceError(Exception):
    """Base class for all errors raised by this package."""


class InputError(RidgeInfluenceError, ValueError):
    """Invalid data or arguments supplied by the caller."""


class NumericalError(RidgeInfluenceError, ArithmeticError):
    """A computation could not be carried out reliably."""


class NonFinite(InputError):
    pass


class ConstantColumn(InputError):
    def __init__(self, column, name=None):
        self.column = column
        self.name = name
        label = f"{column} ({name})" if name is not None else f"{column}"
        super().__init__(f"covariate column {label} has zero variance")


class TooFewObservations(InputError):
    pass


class IndexOutOfRange(InputError, IndexError):
    pass


class NegativeLambda(InputError):
    def __init__(self, lam):
        self.lam = lam
        super().__init__(f"penalty must be non-negative, got {lam!r}")


class WeightOutOfRange(InputError):
    def __init__(self, weight):
        self.weight = weight
        super().__init__(f"normalized weight must lie in [0, 1], got {weight!r}")


class NotUnivariate(InputError):
    pass


class DecompositionFailure(NumericalError):
    pass


class LeverageOne(NumericalError):
    """``1 - H_ii`` vanishes, so the closed-form leave-one-out error is undefined."""

    def __init__(self, index):
        self.index = index
        super().__init__(
            f"observation {index} has leverage 1; leave-one-out error undefined"
        )


class NotAMinimum(NumericalError):
    pass


class BoundaryMinimizer(NumericalError):
    pass


class ZeroOutcome(UserWarning):
    """Raised as a warning: an outcome is exactly zero, so ``r_i / y_i`` is undefined."""
