"""Backend dispatch and channel-level checks."""

import math
from typing import Optional

import numpy as np

from ..config.settings import Settings, settings
from ..exceptions import BackendError
from ..fock.states import DensityOperator
from ..utils.logging import get_logger
from .base import ChannelBackend
from .registry import BackendRegistry, create_backend, create_best_backend
from .spec import Attenuator, ChannelSpec, OmegaEnv, VacuumEnv

logger = get_logger(__name__)

AUTO = "auto"


def _backend_for(component: ChannelSpec, requested: str, config: Settings, n_trunc: Optional[int]) -> ChannelBackend:
    if requested != AUTO:
        backend_class = BackendRegistry.get_backend(requested)
        if backend_class is None:
            raise BackendError(f"Unknown backend: {requested}")
        if component.kind in backend_class.supported_variants:
            return create_backend(requested, config=config, n_trunc=n_trunc)
        logger.debug(f"Backend '{requested}' cannot apply {component.kind}; falling back to the best available")
    return create_best_backend(component, config=config, n_trunc=n_trunc)


def apply_channel(
    spec: ChannelSpec,
    rho: DensityOperator,
    backend: str = AUTO,
    config: Optional[Settings] = None,
    n_trunc: Optional[int] = None,
) -> DensityOperator:
    """Apply a channel, folding compositions left to right.

    Args:
        spec: Attenuator, amplifier, classical noise or composition
        rho: Single-mode input
        backend: Registered backend name or "auto"; components the named
            backend cannot apply go to the best available backend instead
        config: Settings override
        n_trunc: Fixed truncation handed to every backend

    Raises:
        BackendError: If the backend is unknown or no backend supports a component
    """
    config = config or settings
    state = rho
    used = []
    for component in spec.components():
        with _backend_for(component, backend, config, n_trunc) as channel_backend:
            state = channel_backend.apply(component, state)
            used.append(channel_backend.name)
    if len(used) > 1:
        state = state.with_metadata(backends=used)
    return state


def z2_covariance_check(
    spec: ChannelSpec,
    rho: DensityOperator,
    backend: str = AUTO,
    config: Optional[Settings] = None,
) -> float:
    """max |P Ξ(ρ) P − Ξ(P ρ P)| with P = exp(iπn)."""
    direct = apply_channel(spec, rho, backend, config).parity_conjugated()
    conjugated = apply_channel(spec, rho.parity_conjugated(), backend, config)
    n = max(direct.n_trunc, conjugated.n_trunc)
    deviation = float(np.max(np.abs(direct.resized(n).matrix - conjugated.resized(n).matrix)))
    logger.debug(f"Z2 covariance deviation of {spec.kind}: {deviation:.2e}")
    return deviation


def alternative_dilation_output(
    E: float,
    zeta: float = math.pi / 4,
    backend: str = AUTO,
    config: Optional[Settings] = None,
) -> DensityOperator:
    """Ξ_ζ(|0⟩⟨0|) with an Ω₊ environment, computed with the roles swapped.

    Ω₊ enters the channel and the vacuum is the environment; the complementary
    angle π/2 − ζ makes the two χ products coincide.
    """
    config = config or settings
    omega = OmegaEnv(E, branch=config.omega.branch, cat_amplitude=config.omega.cat_amplitude).state()
    swapped = Attenuator(zeta=math.pi / 2 - zeta, env=VacuumEnv())
    return apply_channel(swapped, omega.density(), backend, config)
