"""Stinespring dilation backend: Ξ(ρ) = tr_E U(ρ ⊗ |e⟩⟨e|)U†."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..config.settings import Settings, settings
from ..exceptions import AccuracyError, BackendError, TruncationRiskError
from ..fock.operators import apply_blocks, two_mode_blocks
from ..fock.states import DensityOperator, margin_size
from ..fock.truncation import amplifier_truncation, energy_truncation
from ..utils.logging import get_logger
from .base import ChannelBackend
from .spec import Amplifier, Attenuator, ChannelSpec, DilatedSpec, support_size

logger = get_logger(__name__)

# Margin probability still accepted, with a warning, once the two-mode cap is reached
LEAK_LIMIT = 1e-6


@dataclass(frozen=True, eq=False)
class Dilation:
    """Isometry V|a⟩ = U(|a⟩ ⊗ |e⟩) reshaped to (out, env, in)."""

    tensor: np.ndarray
    n_trunc: int

    def kraus(self, k: int) -> np.ndarray:
        """K_k = (I ⊗ ⟨k|) V."""
        return self.tensor[:, k, :]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """tr_E V ρ V† without forming the joint state."""
        return np.einsum("ika,ab,jkb->ij", self.tensor, rho, self.tensor.conj(), optimize=True)

    def joint(self, rho: np.ndarray) -> np.ndarray:
        """V ρ V† as a two-mode matrix (row-major, system slow)."""
        n = self.n_trunc
        flat = self.tensor.reshape(n * n, n)
        return flat @ rho @ flat.conj().T

    def leak(self, rho: np.ndarray, margin_fraction: float) -> float:
        """Joint output probability with either mode index inside the margin."""
        n = self.n_trunc
        start = n - margin_size(n, margin_fraction)
        populations = np.real(np.einsum("ika,ab,ikb->ik", self.tensor, rho, self.tensor.conj(), optimize=True))
        return float(populations[start:, :].sum() + populations[:start, start:].sum())


def input_energy(spec: DilatedSpec, rho: DensityOperator) -> float:
    return rho.mean_photon_number() + spec.env.energy()


def required_truncation(spec: DilatedSpec, rho: DensityOperator, config: Optional[Settings] = None) -> int:
    """Joint per-mode truncation for applying ``spec`` to ``rho``.

    Covers the supports of the input and environment, the expected output
    energy, and for amplifiers the gain-aware squeezer guard.

    Raises:
        TruncationRiskError: If the requirement exceeds ``truncation.two_mode_max``
    """
    config = config or settings
    energy = input_energy(spec, rho)
    n = max(support_size(rho.populations()), spec.env.support(), 2)
    if isinstance(spec, Amplifier):
        output_energy = spec.gain_sq * energy + math.sinh(spec.r) ** 2
        n = max(n, amplifier_truncation(spec.r, energy))
    else:
        output_energy = energy
    n = max(n, energy_truncation(output_energy, 8))
    cap = config.truncation.two_mode_max
    if n > cap:
        raise TruncationRiskError(
            f"{spec.kind} needs a two-mode truncation of {n} per mode, above the cap of {cap}"
        )
    return n


def build_dilation(spec: DilatedSpec, n_trunc: int, energy: float = 0.0, allow_truncation_risk: bool = False) -> Dilation:
    """Blockwise V = U·(I ⊗ |e⟩) at truncation ``n_trunc``."""
    env = spec.env.fock(n_trunc).amplitudes
    blocks = two_mode_blocks(spec.two_mode(energy), n_trunc, allow_truncation_risk)
    embedded = np.zeros((n_trunc * n_trunc, n_trunc), dtype=complex)
    for a in range(n_trunc):
        embedded[a * n_trunc:(a + 1) * n_trunc, a] = env
    isometry = apply_blocks(blocks, embedded)
    return Dilation(tensor=isometry.reshape(n_trunc, n_trunc, n_trunc), n_trunc=n_trunc)


def dilate(
    spec: DilatedSpec,
    rho: DensityOperator,
    n_trunc: Optional[int] = None,
    config: Optional[Settings] = None,
):
    """Pick a truncation, build the dilation and check the output stays off the margin.

    The truncation grows until the margin leak is below
    ``truncation.leak_tolerance``. At the two-mode cap a leak below
    LEAK_LIMIT is accepted with a warning; an explicit ``n_trunc`` is never grown.

    Returns:
        (dilation, padded input matrix, leak)

    Raises:
        TruncationRiskError: If the leak at the cap is still above LEAK_LIMIT
    """
    config = config or settings
    tolerance = config.truncation.leak_tolerance
    energy = input_energy(spec, rho)
    n = n_trunc or required_truncation(spec, rho, config)
    cap = max(n, config.truncation.two_mode_max)
    while True:
        if rho.n_trunc > n and support_size(rho.populations()) > n:
            raise TruncationRiskError(f"input state does not fit into n_trunc={n}")
        matrix = rho.resized(n).matrix
        dilation = build_dilation(spec, n, energy)
        leak = dilation.leak(matrix, config.truncation.margin_fraction)
        if leak < tolerance:
            return dilation, matrix, leak
        if n_trunc is not None:
            logger.warning(f"{spec.kind} output leaks {leak:.2e} into the margin at fixed n_trunc={n}")
            return dilation, matrix, leak
        if n >= cap:
            if leak < LEAK_LIMIT:
                logger.warning(f"{spec.kind} output leaks {leak:.2e} into the margin at the cap n_trunc={n}")
                return dilation, matrix, leak
            raise TruncationRiskError(f"{spec.kind} output leaks {leak:.2e} into the margin at n_trunc={n}")
        logger.debug(f"{spec.kind}: leak {leak:.2e} at n_trunc={n}, growing")
        n = min(cap, max(n + 2, int(math.ceil(n * config.truncation.growth))))


def apply_stinespring(
    spec: ChannelSpec,
    rho: DensityOperator,
    n_trunc: Optional[int] = None,
    config: Optional[Settings] = None,
) -> DensityOperator:
    """Ξ(ρ) = tr_E U(ρ ⊗ |e⟩⟨e|)U† for an attenuator or amplifier.

    Raises:
        BackendError: If spec is not an attenuator or amplifier
        TruncationRiskError: If the guards cannot be met below the two-mode cap
        AccuracyError: If the output trace drifts by more than 1e-6
    """
    if not isinstance(spec, (Attenuator, Amplifier)):
        raise BackendError(f"the Stinespring backend cannot apply {spec.kind} channels")
    if isinstance(spec, Attenuator) and spec.zeta == 0:
        return rho.with_metadata(backend="stinespring", n_trunc=rho.n_trunc, leak=0.0)

    dilation, matrix, leak = dilate(spec, rho, n_trunc, config)
    output = dilation.apply(matrix)
    output = 0.5 * (output + output.conj().T)
    drift = abs(np.trace(output).real - np.trace(matrix).real) + leak
    if drift > LEAK_LIMIT and n_trunc is None:
        raise AccuracyError(f"{spec.kind} output trace drift {drift:.2e}")
    return DensityOperator(matrix=output, n_trunc=dilation.n_trunc,
                           metadata={"backend": "stinespring", "n_trunc": dilation.n_trunc, "leak": leak})


class StinespringBackend(ChannelBackend):
    """Dilation in the truncated two-mode Fock space."""

    priority = 10
    supported_variants = ("attenuator", "amplifier")

    @property
    def name(self) -> str:
        return "stinespring"

    @staticmethod
    def is_available() -> bool:
        return True

    def apply(self, spec: ChannelSpec, rho: DensityOperator) -> DensityOperator:
        if not self.supports(spec):
            raise BackendError(f"the {self.name} backend cannot apply {spec.kind} channels")
        return apply_stinespring(spec, rho, n_trunc=self.n_trunc, config=self.config)

    def joint_output(self, spec: DilatedSpec, rho: DensityOperator) -> DensityOperator:
        """U(ρ ⊗ |e⟩⟨e|)U† before the partial trace."""
        dilation, matrix, _ = dilate(spec, rho, self.n_trunc, self.config)
        return DensityOperator(matrix=dilation.joint(matrix), n_trunc=dilation.n_trunc, mode_count=2)
