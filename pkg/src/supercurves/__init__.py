"""Exact computations with 1|N super curves: coordinate rings, vector fields,
Berezinians, SUSY lifts and the S(2) duality."""

from .gaussian import GaussianRational
from .superalgebra import AlgebraSignature, SuperElement, SuperMap, substitute, differentiate
from .expressions import parse_expression, serialize, ParseError

__all__ = [
    "GaussianRational",
    "AlgebraSignature",
    "SuperElement",
    "SuperMap",
    "substitute",
    "differentiate",
    "parse_expression",
    "serialize",
    "ParseError",
]
__version__ = "0.1.0"
