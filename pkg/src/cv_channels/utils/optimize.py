"""Multi-start bounded local search."""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from .logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class MultistartResult:
    """Best local minimum over all starts.

    Attributes:
        x: Minimizer
        fun: Objective value at x
        converged: Whether the local search that produced x reported success
        n_starts: Number of starts run
        n_converged: Number of starts whose local search reported success
        message: Optimizer message of the winning start
    """

    x: np.ndarray
    fun: float
    converged: bool
    n_starts: int
    n_converged: int
    message: str


def multistart_minimize(
    objective: Callable[[np.ndarray], float],
    starts: Sequence[Sequence[float]],
    bounds: Sequence[Tuple[float, float]],
    tie_key: Optional[Callable[[np.ndarray], float]] = None,
    tie_tolerance: float = 1e-12,
    ftol: float = 1e-15,
    gtol: float = 1e-11,
    max_iterations: int = 500,
) -> MultistartResult:
    """Run L-BFGS-B from every start and keep the best result.

    Args:
        objective: Scalar function of a real vector
        starts: Initial points, one per row
        bounds: (low, high) per coordinate
        tie_key: Among results within tie_tolerance of the best value, the one
            with the smallest tie_key wins
        tie_tolerance: Absolute objective difference treated as a tie
        ftol: L-BFGS-B relative reduction tolerance
        gtol: L-BFGS-B projected gradient tolerance
        max_iterations: Iteration cap per start

    Returns:
        MultistartResult of the winning start
    """
    starts_array = np.atleast_2d(np.asarray(starts, dtype=float))
    results = []
    for x0 in starts_array:
        x0 = np.clip(x0, [b[0] for b in bounds], [b[1] for b in bounds])
        result = minimize(
            objective,
            x0,
            method="L-BFGS-B",
            bounds=list(bounds),
            options={"ftol": ftol, "gtol": gtol, "maxiter": max_iterations},
        )
        results.append(result)
        logger.debug(f"start {np.round(x0, 4).tolist()} -> f={float(result.fun):.6e} success={result.success}")

    best_value = min(float(r.fun) for r in results)
    tied = [r for r in results if float(r.fun) - best_value <= tie_tolerance]
    if tie_key is not None:
        tied.sort(key=lambda r: tie_key(np.asarray(r.x)))
    best = tied[0]

    n_converged = sum(1 for r in results if r.success)
    if not best.success:
        logger.warning(f"Best multistart result did not report convergence: {best.message}")

    return MultistartResult(
        x=np.asarray(best.x, dtype=float),
        fun=float(best.fun),
        converged=bool(best.success),
        n_starts=len(results),
        n_converged=n_converged,
        message=str(best.message),
    )
