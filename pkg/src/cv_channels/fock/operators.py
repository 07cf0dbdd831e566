"""Ladder operators and Gaussian unitaries on the truncated Fock space."""

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.linalg import expm

from ..exceptions import DimensionError, TruncationRiskError
from ..utils.logging import get_logger
from .states import DensityOperator

logger = get_logger(__name__)


def _check_dimension(n_trunc: int) -> None:
    if n_trunc < 2:
        raise DimensionError(f"n_trunc must be at least 2, got {n_trunc}")


@lru_cache(maxsize=64)
def _lowering(n_trunc: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, n_trunc, dtype=float)), k=1).astype(complex)
    a.setflags(write=False)
    return a


def ladder_matrices(n_trunc: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Lowering, raising and number operators.

    Args:
        n_trunc: Fock truncation (at least 2)

    Returns:
        (a, a†, a†a) as complex matrices

    Raises:
        DimensionError: If n_trunc < 2
    """
    _check_dimension(n_trunc)
    a = _lowering(n_trunc).copy()
    number = np.diag(np.arange(n_trunc, dtype=float)).astype(complex)
    return a, a.conj().T, number


def quadratures(n_trunc: int) -> Tuple[np.ndarray, np.ndarray]:
    """q = (a + a†)/√2 and p = i(a† − a)/√2."""
    a, ad, _ = ladder_matrices(n_trunc)
    return (a + ad) / np.sqrt(2.0), 1j * (ad - a) / np.sqrt(2.0)


def parity_signs(n_trunc: int) -> np.ndarray:
    """Diagonal of exp(iπ a†a)."""
    return np.where(np.arange(n_trunc) % 2 == 0, 1.0, -1.0)


def displacement_guard(alpha: complex, n_trunc: int) -> bool:
    size = abs(alpha)
    return size ** 2 + 6.0 * size < n_trunc


def squeeze_guard(z: complex, n_trunc: int) -> bool:
    return 4.0 * np.exp(2.0 * abs(z)) < n_trunc


def displacement(alpha: complex, n_trunc: int, allow_truncation_risk: bool = False) -> np.ndarray:
    """Truncated D(α) = exp(α a† − ᾱ a).

    Args:
        alpha: Displacement amplitude
        n_trunc: Fock truncation
        allow_truncation_risk: Skip the |α|² + 6|α| < n_trunc guard

    Raises:
        TruncationRiskError: If the guard fails and no override is given
    """
    a, ad, _ = ladder_matrices(n_trunc)
    if not displacement_guard(alpha, n_trunc):
        if not allow_truncation_risk:
            raise TruncationRiskError(
                f"displacement |alpha|={abs(alpha):.4g} needs n_trunc > {abs(alpha) ** 2 + 6 * abs(alpha):.1f}, got {n_trunc}"
            )
        logger.warning(f"Displacement guard overridden for alpha={alpha} at n_trunc={n_trunc}")
    if alpha == 0:
        return np.eye(n_trunc, dtype=complex)
    return expm(alpha * ad - np.conj(alpha) * a)


def squeeze(z: complex, n_trunc: int, allow_truncation_risk: bool = False) -> np.ndarray:
    """Truncated S(z) = exp((z̄ a² − z a†²)/2).

    Raises:
        TruncationRiskError: If 4·exp(2|z|) >= n_trunc and no override is given
    """
    a, ad, _ = ladder_matrices(n_trunc)
    if not squeeze_guard(z, n_trunc):
        if not allow_truncation_risk:
            raise TruncationRiskError(
                f"squeeze |z|={abs(z):.4g} needs n_trunc > {4 * np.exp(2 * abs(z)):.1f}, got {n_trunc}"
            )
        logger.warning(f"Squeeze guard overridden for z={z} at n_trunc={n_trunc}")
    if z == 0:
        return np.eye(n_trunc, dtype=complex)
    return expm(0.5 * (np.conj(z) * (a @ a) - z * (ad @ ad)))


@dataclass(frozen=True)
class Beamsplitter:
    """U_BS(ζ) = exp(ζ a₀†a₁ − ζ̄ a₀a₁†); ζ may be complex."""

    zeta: complex


@dataclass(frozen=True)
class TwoModeSqueeze:
    """U_TM(r) = exp(r (a₀†a₁† − a₀a₁)) with real r.

    input_energy feeds the gain-aware truncation guard.
    """

    r: float
    input_energy: float = 0.0


TwoModeSpec = Union[Beamsplitter, TwoModeSqueeze]


def two_mode_guard(spec: TwoModeSpec, n_trunc: int) -> bool:
    if isinstance(spec, TwoModeSqueeze):
        return np.cosh(spec.r) ** 2 * (spec.input_energy + 1.0) * 8.0 < n_trunc
    return True


def _two_mode_generator(spec: TwoModeSpec, n_trunc: int) -> sparse.csr_matrix:
    a = sparse.csr_matrix(_lowering(n_trunc))
    ad = a.conj().T
    if isinstance(spec, Beamsplitter):
        zeta = complex(spec.zeta)
        return (zeta * sparse.kron(ad, a) - np.conj(zeta) * sparse.kron(a, ad)).tocsr()
    r = float(spec.r)
    return (r * (sparse.kron(ad, ad) - sparse.kron(a, a))).tocsr()


def _conserved_labels(spec: TwoModeSpec, n_trunc: int) -> np.ndarray:
    n0, n1 = np.divmod(np.arange(n_trunc * n_trunc), n_trunc)
    # beamsplitter conserves n0 + n1, the squeezer conserves n0 - n1
    if isinstance(spec, Beamsplitter):
        return n0 + n1
    return n0 - n1


def two_mode_blocks(
    spec: TwoModeSpec,
    n_trunc: int,
    allow_truncation_risk: bool = False,
) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Exponentiate the two-mode generator block by conserved quantum number.

    Returns:
        List of (indices, block unitary); the full unitary is block diagonal
        on these index sets

    Raises:
        DimensionError: If n_trunc < 2
        TruncationRiskError: If the gain-aware guard fails and no override is given
    """
    _check_dimension(n_trunc)
    if not two_mode_guard(spec, n_trunc):
        message = (
            f"two-mode squeeze r={spec.r:.4g} with input energy {spec.input_energy:.4g} "
            f"needs n_trunc > {np.cosh(spec.r) ** 2 * (spec.input_energy + 1) * 8:.1f}, got {n_trunc}"
        )
        if not allow_truncation_risk:
            raise TruncationRiskError(message)
        logger.warning(f"Guard overridden: {message}")

    if isinstance(spec, TwoModeSqueeze):
        spec = TwoModeSqueeze(r=float(spec.r))
    return list(_block_exponentials(spec, n_trunc))


@lru_cache(maxsize=32)
def _block_exponentials(spec: TwoModeSpec, n_trunc: int) -> Tuple[Tuple[np.ndarray, np.ndarray], ...]:
    generator = _two_mode_generator(spec, n_trunc)
    labels = _conserved_labels(spec, n_trunc)
    blocks = []
    for label in np.unique(labels):
        idx = np.flatnonzero(labels == label)
        block = generator[idx][:, idx].toarray()
        unitary = expm(block) if np.any(block) else np.eye(len(idx), dtype=complex)
        idx.setflags(write=False)
        unitary.setflags(write=False)
        blocks.append((idx, unitary))
    return tuple(blocks)


def two_mode_unitary(
    spec: TwoModeSpec,
    n_trunc: int,
    allow_truncation_risk: bool = False,
) -> np.ndarray:
    """Dense two-mode unitary on the (n_trunc)² space in row-major order.

    Args:
        spec: Beamsplitter(ζ) or TwoModeSqueeze(r)
        n_trunc: Truncation per mode
        allow_truncation_risk: Skip the squeezer guard

    Returns:
        Complex unitary matrix
    """
    dim = n_trunc * n_trunc
    unitary = np.zeros((dim, dim), dtype=complex)
    for idx, block in two_mode_blocks(spec, n_trunc, allow_truncation_risk):
        unitary[np.ix_(idx, idx)] = block
    return unitary


def apply_blocks(blocks: List[Tuple[np.ndarray, np.ndarray]], states: np.ndarray) -> np.ndarray:
    """Multiply a block-diagonal unitary into a vector or the rows of a matrix."""
    states = np.asarray(states, dtype=complex)
    out = np.zeros_like(states)
    for idx, block in blocks:
        out[idx] = block @ states[idx]
    return out


def partial_trace(rho: DensityOperator, keep: int) -> DensityOperator:
    """Trace out one mode of a two-mode state.

    Args:
        rho: Two-mode density operator
        keep: Index of the mode to keep (0 or 1)

    Raises:
        DimensionError: If rho is not two-mode or keep is not 0/1
    """
    if rho.mode_count != 2:
        raise DimensionError("partial_trace needs a two-mode state")
    if keep not in (0, 1):
        raise DimensionError(f"keep must be 0 or 1, got {keep}")
    n = rho.n_trunc
    tensor = rho.matrix.reshape(n, n, n, n)
    if keep == 0:
        reduced = np.einsum("ikjk->ij", tensor)
    else:
        reduced = np.einsum("kikj->ij", tensor)
    return DensityOperator(matrix=reduced, n_trunc=n)


def reduced_from_vector(amplitudes: np.ndarray, n_trunc: int, keep: int = 0) -> np.ndarray:
    """Reduced density matrix of a pure two-mode vector."""
    grid = np.asarray(amplitudes).reshape(n_trunc, n_trunc)
    if keep == 0:
        return grid @ grid.conj().T
    return grid.T @ grid.conj()
