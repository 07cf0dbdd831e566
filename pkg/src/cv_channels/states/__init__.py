"""Gaussian pure states, characteristic functions and the Ω₊ superposition."""

from .charfn import CharFn, DensityCharFn, GaussianCharFn, OmegaCharFn, reconstruct_density
from .gaussian import DistantPair, GaussianPure, max_distant_pair, to_fock
from .superposition import OmegaState, build_omega

__all__ = [
    'CharFn',
    'DensityCharFn',
    'DistantPair',
    'GaussianCharFn',
    'GaussianPure',
    'OmegaCharFn',
    'OmegaState',
    'build_omega',
    'max_distant_pair',
    'reconstruct_density',
    'to_fock',
]
