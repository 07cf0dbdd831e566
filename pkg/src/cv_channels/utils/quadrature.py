"""Quadrature rules for plane and line integrals."""

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np

from ..exceptions import AccuracyError
from .logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class PolarNodes:
    """Tensor-product polar rule for integrals over the plane.

    ``weights`` already include the Jacobian s ds dphi, so
    ``sum(weights * f(points))`` approximates the plane integral of f.
    """

    points: np.ndarray
    weights: np.ndarray
    radius: float
    radial_nodes: int
    angular_nodes: int


@lru_cache(maxsize=32)
def _legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def polar_nodes(radius: float, radial_nodes: int, angular_nodes: int) -> PolarNodes:
    """Gauss-Legendre nodes in radius on [0, radius] times uniform angles.

    Args:
        radius: Outer radius
        radial_nodes: Gauss-Legendre order
        angular_nodes: Number of equally spaced angles

    Returns:
        PolarNodes with complex points s*exp(i*phi)
    """
    t, wt = _legendre(radial_nodes)
    s = 0.5 * radius * (t + 1.0)
    ws = 0.5 * radius * wt * s
    phi = 2.0 * np.pi * np.arange(angular_nodes) / angular_nodes
    wphi = 2.0 * np.pi / angular_nodes

    points = (s[:, None] * np.exp(1j * phi)[None, :]).ravel()
    weights = (ws[:, None] * np.full(angular_nodes, wphi)[None, :]).ravel()
    return PolarNodes(points=points, weights=weights, radius=radius,
                      radial_nodes=radial_nodes, angular_nodes=angular_nodes)


def find_cutoff_radius(
    magnitude: Callable[[np.ndarray], np.ndarray],
    cutoff: float,
    max_radius: float,
    angular_nodes: int = 64,
    start: float = 1.0,
    step: float = 0.5,
) -> float:
    """Smallest radius beyond which a rapidly decaying integrand stays below cutoff.

    The radius grows from ``start`` until the maximum of ``magnitude`` on a
    ring, and on the next ring, are both below ``cutoff``.

    Raises:
        AccuracyError: If no such radius is found below max_radius
    """
    phi = 2.0 * np.pi * np.arange(angular_nodes) / angular_nodes
    ring = np.exp(1j * phi)
    radius = start
    while radius <= max_radius:
        inner = float(np.max(magnitude(radius * ring)))
        outer = float(np.max(magnitude((radius + step) * ring)))
        if inner < cutoff and outer < cutoff:
            return radius
        radius += step
    raise AccuracyError(f"integrand still above {cutoff:.1e} at radius {max_radius}")


def adaptive_trapezoid(
    integrand: Callable[[np.ndarray], np.ndarray],
    half_width: float,
    initial_nodes: int,
    tolerance: float,
    accuracy_limit: float,
    max_refinements: int,
    label: str = "trapezoid",
) -> Tuple[np.ndarray, int, float]:
    """Trapezoid rule on [-half_width, half_width] refined by step halving.

    Each halving reuses the previous sum and evaluates only the new midpoints.
    The integrand maps a 1-D array of abscissae to an array whose first axis
    matches the abscissae; the result has the remaining shape.

    Args:
        integrand: Vectorized integrand
        half_width: Half-length of the interval
        initial_nodes: Nodes of the coarsest rule (including both ends)
        tolerance: Max-abs agreement between successive halvings
        accuracy_limit: Final disagreement above which AccuracyError is raised
        max_refinements: Maximum number of halvings
        label: Name used in log messages

    Returns:
        (integral, refinements used, final change)

    Raises:
        AccuracyError: If successive halvings disagree by more than accuracy_limit
    """
    a, b = -half_width, half_width
    x = np.linspace(a, b, initial_nodes)
    h = (b - a) / (initial_nodes - 1)
    values = integrand(x)
    total = values.sum(axis=0) - 0.5 * (values[0] + values[-1])
    estimate = h * total

    change = float("inf")
    for level in range(1, max_refinements + 1):
        midpoints = a + h * (np.arange(len(x) - 1) + 0.5)
        total = total + integrand(midpoints).sum(axis=0)
        x = np.sort(np.concatenate([x, midpoints]))
        h *= 0.5
        refined = h * total
        change = float(np.max(np.abs(refined - estimate)))
        estimate = refined
        logger.debug(f"{label}: halving {level} change {change:.3e}")
        if change < tolerance:
            return estimate, level, change

    if change > accuracy_limit:
        raise AccuracyError(
            f"{label} did not converge: successive halvings differ by {change:.3e}"
        )
    logger.warning(f"{label}: accepted with change {change:.3e} above target {tolerance:.1e}")
    return estimate, max_refinements, change
