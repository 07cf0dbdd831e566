"""Successive-refinement loops shared by the quadrature and truncation code."""

from dataclasses import dataclass
from typing import Any, Callable, Generic, TypeVar

from ..exceptions import AccuracyError
from .logging import get_logger

logger = get_logger(__name__)

T = TypeVar("T")


@dataclass(frozen=True)
class RefinementResult(Generic[T]):
    """Converged value of a refinement loop.

    Attributes:
        value: Result at the finest level computed
        level: Index of that level (0 is the coarsest)
        change: Distance between the last two levels
    """

    value: T
    level: int
    change: float


def refine_until_stable(
    evaluate: Callable[[int], T],
    distance: Callable[[T, T], float],
    tolerance: float,
    max_refinements: int,
    label: str = "refinement",
    accept_within: float = 0.0,
) -> RefinementResult[T]:
    """Evaluate at increasing refinement levels until two levels agree.

    Args:
        evaluate: Computes the quantity at a given level
        distance: Distance between two successive results
        tolerance: Agreement that counts as converged
        max_refinements: Maximum number of levels after the first
        label: Name used in log messages and errors
        accept_within: If positive, a final disagreement below this value is
            accepted with a warning instead of raising

    Returns:
        RefinementResult for the finest level evaluated

    Raises:
        AccuracyError: If successive levels still disagree after the last refinement
    """
    previous = evaluate(0)
    change = float("inf")

    for level in range(1, max_refinements + 1):
        current: Any = evaluate(level)
        change = float(distance(current, previous))
        logger.debug(f"{label}: level {level}/{max_refinements} change {change:.3e}")
        if change < tolerance:
            return RefinementResult(value=current, level=level, change=change)
        previous = current

    if accept_within > 0 and change < accept_within:
        logger.warning(
            f"{label} reached level {max_refinements} with change {change:.3e} "
            f"(target {tolerance:.1e}); accepting result"
        )
        return RefinementResult(value=previous, level=max_refinements, change=change)

    logger.error(f"{label} failed to converge after {max_refinements} refinements: change {change:.3e}")
    raise AccuracyError(
        f"{label} did not converge: successive levels differ by {change:.3e} "
        f"after {max_refinements} refinements"
    )
