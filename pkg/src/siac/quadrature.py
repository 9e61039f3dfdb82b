"""Gauss-Legendre quadrature rules, cached by point count."""

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss


@lru_cache(maxsize=None)
def gauss_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]; exact for polynomials of degree 2n-1."""
    if n < 1:
        raise ValueError(f"need at least one quadrature point, got {n}")
    nodes, weights = leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_points(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights mapped to [a, b]."""
    r, w = gauss_rule(n)
    half = 0.5 * (b - a)
    return a + half * (r + 1.0), half * w


def integrate(f, a: float, b: float, n: int) -> float:
    """Fixed-order Gauss integral of a callable over [a, b]."""
    x, w = gauss_points(a, b, n)
    return float(np.dot(w, f(x)))
