"""
Attenuator, amplifier and classical-noise channels.

Channel specifications are plain frozen values; their action on density
operators is provided by pluggable backends (Stinespring dilation,
characteristic-function composition, operator-sum form) that must agree
with each other within numerical tolerance.
"""

from .base import ChannelBackend
from .charfn_backend import CharFnBackend, char_fn_output, classical_noise
from .kraus import KrausBackend, apply_kraus, completeness_defect, kraus_decomposition
from .operations import alternative_dilation_output, apply_channel, z2_covariance_check
from .registry import BackendRegistry, create_backend, create_best_backend, list_available_backends
from .spec import (
    Amplifier,
    Attenuator,
    ChannelSpec,
    ClassicalNoise,
    Composition,
    FockEnv,
    GaussianEnv,
    OmegaEnv,
    SymplecticMatrix,
    VacuumEnv,
    symplectic_matrix,
)
from .stinespring import StinespringBackend, apply_stinespring

__all__ = [
    'Amplifier',
    'Attenuator',
    'BackendRegistry',
    'ChannelBackend',
    'CharFnBackend',
    'ChannelSpec',
    'ClassicalNoise',
    'Composition',
    'FockEnv',
    'GaussianEnv',
    'KrausBackend',
    'OmegaEnv',
    'StinespringBackend',
    'SymplecticMatrix',
    'VacuumEnv',
    'alternative_dilation_output',
    'apply_channel',
    'apply_kraus',
    'apply_stinespring',
    'char_fn_output',
    'classical_noise',
    'completeness_defect',
    'create_backend',
    'create_best_backend',
    'kraus_decomposition',
    'list_available_backends',
    'symplectic_matrix',
    'z2_covariance_check',
]

BackendRegistry.register('stinespring', StinespringBackend)
BackendRegistry.register('charfn', CharFnBackend)
BackendRegistry.register('kraus', KrausBackend)
