"""Exact finite-depth laboratory for conditional probability on Cantor space."""

from ._rational import BACKEND, Q, Rational, fmt
from .core import (
    BasicSet,
    CantorLabError,
    CylinderFunction,
    CylinderSet,
    PreconditionError,
    RationalInterval,
    Rect,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BasicSet",
    "CantorLabError",
    "CylinderFunction",
    "CylinderSet",
    "PreconditionError",
    "Q",
    "Rational",
    "RationalInterval",
    "Rect",
    "fmt",
]
