"""
Registry for managing channel backends.
"""

from typing import Any, Dict, List, Optional, Type

from ..exceptions import BackendError
from ..utils.logging import get_logger
from .base import ChannelBackend
from .spec import ChannelSpec

logger = get_logger(__name__)


class BackendRegistry:
    """Registry for channel backends.

    This class manages the registration and discovery of channel backends.
    It provides a factory for backend instances and picks the preferred
    available backend for a given channel kind.
    """

    _backends: Dict[str, Type[ChannelBackend]] = {}
    _availability_cache: Dict[str, bool] = {}

    @classmethod
    def register(cls, name: str, backend_class: Type[ChannelBackend]) -> None:
        """Register a channel backend, overwriting any backend of the same name."""
        if name in cls._backends:
            logger.warning(f"Backend '{name}' is already registered. Overwriting.")

        cls._backends[name] = backend_class
        cls._availability_cache.pop(name, None)
        logger.debug(f"Registered channel backend: {name}")

    @classmethod
    def unregister(cls, name: str) -> None:
        if name in cls._backends:
            del cls._backends[name]
            cls._availability_cache.pop(name, None)
            logger.debug(f"Unregistered channel backend: {name}")

    @classmethod
    def get_backend(cls, name: str) -> Optional[Type[ChannelBackend]]:
        return cls._backends.get(name)

    @classmethod
    def list_backends(cls) -> List[str]:
        """Registered backend names in registration order."""
        return list(cls._backends.keys())

    @classmethod
    def get_available_backends(cls) -> Dict[str, Type[ChannelBackend]]:
        available = {}
        for name, backend_class in cls._backends.items():
            if cls.is_backend_available(name):
                available[name] = backend_class
        return available

    @classmethod
    def is_backend_available(cls, name: str) -> bool:
        """Check (and cache) whether a backend can be used."""
        if name in cls._availability_cache:
            return cls._availability_cache[name]

        backend_class = cls._backends.get(name)
        if backend_class is None:
            cls._availability_cache[name] = False
            return False

        try:
            available = backend_class.is_available()
            cls._availability_cache[name] = available
            return available
        except Exception as e:
            logger.debug(f"Error checking availability of backend '{name}': {e}")
            cls._availability_cache[name] = False
            return False

    @classmethod
    def get_backend_priority(cls, name: str) -> int:
        """Priority of a backend (lower number = higher priority, 100 if unknown)."""
        backend_class = cls._backends.get(name)
        if backend_class is None:
            return 100
        return getattr(backend_class, 'priority', 100)

    @classmethod
    def _supports(cls, backend_class: Type[ChannelBackend], spec: Optional[ChannelSpec]) -> bool:
        if spec is None:
            return True
        return spec.kind in getattr(backend_class, "supported_variants", ())

    @classmethod
    def get_best_backend(cls, spec: Optional[ChannelSpec] = None) -> Optional[str]:
        """Best available backend supporting ``spec`` (any backend if spec is None)."""
        candidates = [
            name for name, backend_class in cls.get_available_backends().items()
            if cls._supports(backend_class, spec)
        ]
        if not candidates:
            return None
        return sorted(candidates, key=cls.get_backend_priority)[0]

    @classmethod
    def clear_cache(cls) -> None:
        """Clear the availability cache."""
        cls._availability_cache.clear()

    @classmethod
    def get_backend_info(cls) -> Dict[str, Dict[str, Any]]:
        info = {}
        for name, backend_class in cls._backends.items():
            backend_info: Dict[str, Any] = {
                'name': name,
                'available': cls.is_backend_available(name),
                'priority': cls.get_backend_priority(name),
            }
            try:
                temp_instance = backend_class()
                backend_info.update(temp_instance.get_backend_info())
            except Exception as e:
                logger.debug(f"Could not get detailed info for backend '{name}': {e}")
            info[name] = backend_info
        return info


def create_backend(backend_name: str, **kwargs) -> ChannelBackend:
    """Create a backend instance by name.

    Raises:
        BackendError: If the backend is unknown, unavailable or fails to construct
    """
    backend_class = BackendRegistry.get_backend(backend_name)
    if backend_class is None:
        raise BackendError(f"Unknown backend: {backend_name}")

    if not BackendRegistry.is_backend_available(backend_name):
        raise BackendError(f"Backend '{backend_name}' is not available")

    try:
        return backend_class(**kwargs)
    except Exception as e:
        raise BackendError(f"Failed to create backend '{backend_name}': {e}")


def create_best_backend(spec: Optional[ChannelSpec] = None, **kwargs) -> ChannelBackend:
    """Create the preferred available backend for ``spec``.

    Raises:
        BackendError: If no available backend supports the channel kind
    """
    backend_name = BackendRegistry.get_best_backend(spec)
    if backend_name is None:
        kind = spec.kind if spec is not None else "any"
        raise BackendError(f"No channel backend is available for {kind} channels")

    logger.debug(f"Using best available backend: {backend_name}")
    return create_backend(backend_name, **kwargs)


def list_available_backends() -> List[str]:
    return list(BackendRegistry.get_available_backends().keys())
