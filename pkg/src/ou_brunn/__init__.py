"""Gaussian principal frequency of convex bodies: solvers, oracles and inequality experiments."""

from .bodies import Ball, ConvexBody, DirectionGrid, Interval, Polygon, SmoothBody, minkowski_combine
from .grid import converged_eigenvalue, solve_body

__all__ = [
    "Ball",
    "ConvexBody",
    "DirectionGrid",
    "Interval",
    "Polygon",
    "SmoothBody",
    "minkowski_combine",
    "converged_eigenvalue",
    "solve_body",
]

__version__ = "0.1.0"
