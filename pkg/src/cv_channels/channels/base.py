"""
Abstract base class for channel backends.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, Optional, Tuple

from ..config.settings import Settings, settings as global_settings
from ..fock.states import DensityOperator
from .spec import ChannelSpec


class ChannelBackend(ABC):
    """Abstract base class for channel backends.

    A backend realizes the action of attenuator, amplifier and classical-noise
    specifications on single-mode density operators. Backends are
    interchangeable: for a given specification and input they must agree up
    to their documented numerical tolerance.
    """

    #: Lower number = preferred by ``BackendRegistry.get_best_backend``
    priority: int = 100

    #: Channel kinds (``ChannelSpec.kind``) this backend can apply
    supported_variants: Tuple[str, ...] = ()

    def __init__(self, config: Optional[Settings] = None, n_trunc: Optional[int] = None, **kwargs):
        """Initialize the backend.

        Args:
            config: Settings supplying truncation and quadrature policy
            n_trunc: Fixed output truncation; chosen per call when omitted
            **kwargs: Backend-specific options
        """
        self.config = config or global_settings
        self.n_trunc = n_trunc
        self.options = kwargs

    @property
    @abstractmethod
    def name(self) -> str:
        """Backend name identifier."""
        pass

    @abstractmethod
    def apply(self, spec: ChannelSpec, rho: DensityOperator) -> DensityOperator:
        """Apply a single (non-composite) channel to a single-mode state.

        Raises:
            BackendError: If the channel kind is not supported
            TruncationRiskError: If the state cannot be represented faithfully
            AccuracyError: If a conservation or quadrature check fails
        """
        pass

    @staticmethod
    @abstractmethod
    def is_available() -> bool:
        """Check if this backend can run in the current environment."""
        pass

    def supports(self, spec: ChannelSpec) -> bool:
        return spec.kind in self.supported_variants

    def get_backend_info(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'supported_variants': list(self.supported_variants),
            'n_trunc': self.n_trunc,
        }

    def close(self) -> None:
        """Release cached resources."""
        pass

    def __enter__(self):
        """Context manager entry."""
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        """Context manager exit."""
        self.close()
