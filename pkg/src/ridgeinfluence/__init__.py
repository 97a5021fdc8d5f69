"""Influence of single observations on the leave-one-out tuned ridge penalty."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    InputError,
    NumericalError,
    RidgeInfluenceError,
)
from .influence import (  # noqa: E402
    classify,
    error_derivatives,
    influence_derivatives,
    weight_derivative,
    univariate_sign_analysis,
)
from .loocv import Boundary, SolverOptions, evaluate, minimize_cv  # noqa: E402
from .spectral import RawDataset, decompose, standardize  # noqa: E402
from .weighted import WeightGrid, influence_curve, influence_curves, weighted_cv_value  # noqa: E402

__all__ = [
    "Boundary",
    "InputError",
    "NumericalError",
    "RawDataset",
    "RidgeInfluenceError",
    "SolverOptions",
    "WeightGrid",
    "classify",
    "decompose",
    "error_derivatives",
    "evaluate",
    "influence_curve",
    "influence_curves",
    "influence_derivatives",
    "weight_derivative",
    "minimize_cv",
    "standardize",
    "univariate_sign_analysis",
    "weighted_cv_value",
]
