"""Operator-sum backend: K_k = (I ⊗ ⟨k|) U (I ⊗ |e⟩)."""

from typing import List, Optional

import numpy as np

from ..exceptions import BackendError, TruncationRiskError
from ..fock.states import DensityOperator
from ..utils.logging import get_logger
from .base import ChannelBackend
from .spec import Amplifier, Attenuator, ChannelSpec, DilatedSpec
from .stinespring import build_dilation, dilate

logger = get_logger(__name__)

# Environment outcomes are kept until the completeness defect drops below this
CUTOFF_DEFECT = 1e-8

# Largest completeness defect accepted on the guarded sub-block
COMPLETENESS_TOLERANCE = 1e-6


def completeness_defect(kraus: List[np.ndarray], block: Optional[int] = None) -> float:
    """max |Σ K†K − I| on the indices below ``block`` (default n_trunc/2)."""
    n = kraus[0].shape[1]
    block = block or max(1, n // 2)
    total = np.zeros((n, n), dtype=complex)
    for operator in kraus:
        total += operator.conj().T @ operator
    return float(np.max(np.abs(total[:block, :block] - np.eye(block))))


def _truncate_outcomes(tensor: np.ndarray) -> List[np.ndarray]:
    n = tensor.shape[1]
    block = max(1, n // 2)
    # per-outcome contribution to the diagonal of Σ K†K on the low block
    gram = np.einsum("ika,ikb->kab", tensor.conj()[:, :, :block], tensor[:, :, :block], optimize=True)
    cumulative = np.cumsum(gram, axis=0)
    eye = np.eye(block)
    keep = n
    for k in range(n):
        if np.max(np.abs(cumulative[k] - eye)) < CUTOFF_DEFECT:
            keep = k + 1
            break
    return [tensor[:, k, :].copy() for k in range(keep)]


def kraus_decomposition(spec: DilatedSpec, n_trunc: int, energy: float = 0.0) -> List[np.ndarray]:
    """Discrete Kraus family of an attenuator or amplifier on a truncation that holds the environment.

    Args:
        spec: Attenuator or amplifier with its environment
        n_trunc: Per-mode truncation, raised to the environment support when that is larger
        energy: Input energy for the squeezer guard

    Returns:
        Operators K_k, k = 0..K−1, with trailing environment outcomes cut once the
        completeness defect on the low block falls below 1e-8

    Raises:
        TruncationRiskError: If the completeness defect on indices below n_trunc/2 exceeds 1e-6
    """
    if not isinstance(spec, (Attenuator, Amplifier)):
        raise BackendError(f"no operator-sum form for {spec.kind} channels")
    support = spec.env.support()
    if support > n_trunc:
        logger.debug(f"{spec.kind}: environment needs n_trunc={support}, growing from {n_trunc}")
        n_trunc = support
    dilation = build_dilation(spec, n_trunc, energy)
    kraus = _truncate_outcomes(dilation.tensor)
    defect = completeness_defect(kraus)
    if defect > COMPLETENESS_TOLERANCE:
        raise TruncationRiskError(
            f"Kraus completeness defect {defect:.2e} above {COMPLETENESS_TOLERANCE:.0e} at n_trunc={n_trunc}"
        )
    logger.debug(f"{spec.kind}: {len(kraus)} Kraus operators at n_trunc={n_trunc}, defect {defect:.2e}")
    return kraus


def apply_kraus(kraus: List[np.ndarray], rho: np.ndarray) -> np.ndarray:
    out = np.zeros_like(rho, dtype=complex)
    for operator in kraus:
        out += operator @ rho @ operator.conj().T
    return out


class KrausBackend(ChannelBackend):
    """Σ_k K_k ρ K_k† with the cut Kraus family."""

    priority = 30
    supported_variants = ("attenuator", "amplifier")

    @property
    def name(self) -> str:
        return "kraus"

    @staticmethod
    def is_available() -> bool:
        return True

    def apply(self, spec: ChannelSpec, rho: DensityOperator) -> DensityOperator:
        if not self.supports(spec):
            raise BackendError(f"the {self.name} backend cannot apply {spec.kind} channels")
        if isinstance(spec, Attenuator) and spec.zeta == 0:
            return rho.with_metadata(backend=self.name, n_trunc=rho.n_trunc, kraus_count=1)

        # dilate picks the truncation and certifies the margin leak
        dilation, matrix, leak = dilate(spec, rho, self.n_trunc, self.config)
        kraus = _truncate_outcomes(dilation.tensor)
        defect = completeness_defect(kraus)
        if defect > COMPLETENESS_TOLERANCE:
            raise TruncationRiskError(f"Kraus completeness defect {defect:.2e} at n_trunc={dilation.n_trunc}")
        output = apply_kraus(kraus, matrix)
        output = 0.5 * (output + output.conj().T)
        return DensityOperator(matrix=output, n_trunc=dilation.n_trunc,
                               metadata={"backend": self.name, "n_trunc": dilation.n_trunc,
                                         "kraus_count": len(kraus), "completeness_defect": defect,
                                         "leak": leak})
