"""
Composite Gauss-Legendre quadrature over the circle ``theta in [0, 2 pi]``.

Panels are split at the rays ``theta = omega/2`` and ``2 pi - omega/2``
where integrands are only C1, and refined uniformly by doubling until two
successive results agree.
"""
import logging
import math
from functools import lru_cache
from typing import Callable, Iterable, Sequence, Tuple

import numpy as np

from .config import Config
from .exceptions import QuadratureError

logger = logging.getLogger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]


@lru_cache(maxsize=16)
def gauss_legendre(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on ``[-1, 1]``."""
    if nodes < 1:
        raise QuadratureError(f'Need at least one node, got {nodes}')
    x, w = np.polynomial.legendre.leggauss(nodes)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def panel_edges(breakpoints: Sequence[float], subdivisions: int) -> np.ndarray:
    """Split each interval between consecutive breakpoints into ``subdivisions`` panels."""
    edges = [np.linspace(a, b, subdivisions + 1)[:-1] for a, b in zip(breakpoints[:-1], breakpoints[1:])]
    return np.concatenate(edges + [np.array([breakpoints[-1]])])


def composite_gauss_legendre(f: Integrand, edges: np.ndarray, nodes: int) -> Tuple[complex, float]:
    """``(integral of f, integral of |f|)`` over the panels ``edges``."""
    x, w = gauss_legendre(nodes)
    left, right = edges[:-1, None], edges[1:, None]
    half = (right - left) / 2
    points = (left + right) / 2 + half * x[None, :]
    values = np.asarray(f(points.ravel()), dtype=complex).reshape(points.shape)
    weights = half * w[None, :]
    return complex(np.sum(weights * values)), float(np.sum(weights * np.abs(values)))


def circle_breakpoints(omega: float, extra: Iterable[float] = ()) -> np.ndarray:
    """Sorted breakpoints of ``[0, 2 pi]`` including both rays."""
    two_pi = 2 * math.pi
    points = {0.0, two_pi, omega / 2, two_pi - omega / 2}
    points.update(float(np.mod(t, two_pi)) for t in extra)
    return np.array(sorted(points))


def integrate_circle(f: Integrand, omega: float, nodes: int = Config.QUAD_NODES,
                     tol: float = Config.QUAD_TOLERANCE,
                     max_doublings: int = Config.QUAD_MAX_DOUBLINGS,
                     breakpoints: Iterable[float] = ()) -> complex:
    """
    Integral of ``f(theta)`` over ``[0, 2 pi]``.

    ``f`` receives a 1-D array of angles and returns values of the same
    shape. The refined result is returned once it differs from the
    previous one by at most ``tol`` times the integral of ``|f|``.

    Raises:
        QuadratureError: If the agreement is not reached after ``max_doublings``
    """
    points = circle_breakpoints(omega, breakpoints)
    previous, _ = composite_gauss_legendre(f, panel_edges(points, 1), nodes)
    subdivisions = 1
    for _ in range(max_doublings):
        subdivisions *= 2
        value, l1 = composite_gauss_legendre(f, panel_edges(points, subdivisions), nodes)
        change = abs(value - previous)
        if change <= tol * l1 or l1 == 0.0:
            logger.debug('quadrature converged with %d subdivisions (change %.2e)', subdivisions, change)
            return value
        previous = value
    raise QuadratureError(
        f'No {tol:g} agreement after {max_doublings} doublings ({subdivisions} panels per arc)'
    )
