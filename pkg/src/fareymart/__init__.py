"""Exact Farey-fraction orthonormal system: points of Q/Z, continued fraction
streams, step-function basis, martingale checks and finite-Q experiments."""

from .contfrac import CFStream, parse_alpha
from .errors import CFLengthError, DomainError, NotAdmissibleError, PreconditionError
from .farey import ComponentInterval, FareyPoint, farey_sequence, neighbors
from .stepfn import PiecewiseLinear, StepFunction, f_beta, inner_product

__all__ = [
    "CFStream",
    "parse_alpha",
    "CFLengthError",
    "DomainError",
    "NotAdmissibleError",
    "PreconditionError",
    "ComponentInterval",
    "FareyPoint",
    "farey_sequence",
    "neighbors",
    "PiecewiseLinear",
    "StepFunction",
    "f_beta",
    "inner_product",
]

__version__ = "0.1.0"
