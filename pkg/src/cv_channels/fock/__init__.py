"""Truncated Fock-space algebra for one and two modes."""

from .operators import (
    Beamsplitter,
    TwoModeSqueeze,
    displacement,
    ladder_matrices,
    partial_trace,
    quadratures,
    squeeze,
    two_mode_unitary,
)
from .phase_space import char_fn_numeric, coherent_amplitudes, displacement_elements, weyl_beta
from .states import DensityOperator, FockVector
from .truncation import converge_truncation

__all__ = [
    'Beamsplitter',
    'DensityOperator',
    'FockVector',
    'TwoModeSqueeze',
    'char_fn_numeric',
    'coherent_amplitudes',
    'converge_truncation',
    'displacement',
    'displacement_elements',
    'ladder_matrices',
    'partial_trace',
    'quadratures',
    'squeeze',
    'two_mode_unitary',
    'weyl_beta',
]
