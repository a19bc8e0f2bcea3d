"""Indefinite theta series attached to geodesic polygons and dodecahedra."""

__version__ = "0.1.0"

from .qspace import QuadraticSpace, NegativePlane, FloatTolerance
from .ngon import NGon, validate, epsilon, w_invariant

__all__ = [
    "QuadraticSpace", "NegativePlane", "FloatTolerance",
    "NGon", "validate", "epsilon", "w_invariant",
]
