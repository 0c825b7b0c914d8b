"""Numerical and exact experiments on Hardy-Sobolev spaces of the unit ball."""
from .series import TruncSeries, evaluate, evaluate_many, graded_indices, multiply, radial_derivative
from .space import SpaceModel, hs_norm, kernel_eval
from .operator import OperatorMatrix, build_matrix, operator_norm
from .symbols import parse_symbol

__version__ = "0.1.0"

__all__ = [
    "TruncSeries",
    "evaluate",
    "evaluate_many",
    "graded_indices",
    "multiply",
    "radial_derivative",
    "SpaceModel",
    "hs_norm",
    "kernel_eval",
    "OperatorMatrix",
    "build_matrix",
    "operator_norm",
    "parse_symbol",
]
