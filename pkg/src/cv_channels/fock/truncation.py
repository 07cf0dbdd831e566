"""Adaptive Fock truncation.

A state built at truncation n is accepted when the probability carried by
the top ``margin_fraction`` of indices is below ``tail_tolerance``. Builders
that trip an operator guard are retried at a larger truncation.
"""

import math
from dataclasses import dataclass
from typing import Callable, Generic, Optional, TypeVar, Union

import numpy as np

from ..config.settings import TruncationSettings, settings
from ..exceptions import TruncationRiskError
from ..utils.logging import get_logger
from .states import DensityOperator, FockVector, margin_size

logger = get_logger(__name__)

State = TypeVar("State", FockVector, DensityOperator)


@dataclass(frozen=True)
class Converged(Generic[State]):
    """A state together with the truncation that certified it."""

    state: State
    n_trunc: int
    tail_mass: float
    attempts: int


def unitarity_defect(unitary: np.ndarray, n_trunc: int, margin_fraction: float, mode_count: int = 1) -> float:
    """max |U†U − I| restricted to indices below n_trunc − margin in every mode."""
    keep = n_trunc - margin_size(n_trunc, margin_fraction)
    gram = unitary.conj().T @ unitary
    if mode_count == 1:
        idx = np.arange(keep)
    else:
        n0, n1 = np.divmod(np.arange(n_trunc * n_trunc), n_trunc)
        idx = np.flatnonzero((n0 < keep) & (n1 < keep))
    block = gram[np.ix_(idx, idx)]
    return float(np.max(np.abs(block - np.eye(idx.size))))


def energy_truncation(energy: float, n_start: int) -> int:
    """Starting truncation for a state of mean photon number ``energy``."""
    return max(n_start, int(math.ceil(4.0 * energy + 8.0 * math.sqrt(energy + 1.0) + 8.0)))


def amplifier_truncation(r: float, input_energy: float) -> int:
    """Smallest n_trunc passing the two-mode squeezer guard."""
    return int(math.floor(8.0 * math.cosh(r) ** 2 * (input_energy + 1.0))) + 1


def converge_truncation(
    build: Callable[[int], State],
    n_start: Optional[int] = None,
    config: Optional[TruncationSettings] = None,
    n_max: Optional[int] = None,
    label: str = "state",
) -> Converged:
    """Grow the truncation until the built state has negligible tail mass.

    Args:
        build: Maps a truncation to a state
        n_start: First truncation tried (defaults to the configured n_start)
        config: Truncation settings (defaults to the global settings)
        n_max: Hard cap overriding ``config.n_max``
        label: Name used in log and error messages

    Returns:
        Converged record carrying the accepted state

    Raises:
        TruncationRiskError: If the cap is reached without convergence
    """
    config = config or settings.truncation
    cap = n_max or config.n_max
    n_trunc = max(2, n_start or config.n_start)
    attempts = 0
    last_tail: Union[float, str] = "n/a"

    while True:
        attempts += 1
        try:
            state = build(n_trunc)
        except TruncationRiskError as e:
            logger.debug(f"{label}: guard rejected n_trunc={n_trunc}: {e}")
            state = None

        if state is not None:
            tail = state.tail_mass(config.margin_fraction)
            last_tail = tail
            if tail < config.tail_tolerance:
                logger.debug(f"{label}: converged at n_trunc={n_trunc} (tail {tail:.2e}, {attempts} attempts)")
                return Converged(state=state, n_trunc=n_trunc, tail_mass=tail, attempts=attempts)
            logger.debug(f"{label}: tail {tail:.2e} at n_trunc={n_trunc}")

        if n_trunc >= cap:
            raise TruncationRiskError(
                f"{label} did not converge below n_trunc={cap} (last tail mass {last_tail})"
            )
        n_trunc = min(cap, max(n_trunc + 2, int(math.ceil(n_trunc * config.growth))))
