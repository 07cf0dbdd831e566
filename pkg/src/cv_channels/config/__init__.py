"""Configuration module for cv_channels."""

from .settings import (
    GridSettings,
    OmegaSettings,
    OptimizerSettings,
    PolarQuadratureSettings,
    QuadratureSpec,
    RunConfig,
    Settings,
    TruncationSettings,
    settings,
)

__all__ = [
    "GridSettings",
    "OmegaSettings",
    "OptimizerSettings",
    "PolarQuadratureSettings",
    "QuadratureSpec",
    "RunConfig",
    "Settings",
    "TruncationSettings",
    "settings",
]
