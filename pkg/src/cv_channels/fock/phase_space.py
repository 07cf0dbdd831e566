"""Coherent amplitudes, Weyl displacement matrix elements and the numeric characteristic function."""

import math
from functools import lru_cache
from typing import Tuple, Union

import numpy as np
from scipy.special import gammaln, xlogy

from ..exceptions import DimensionError
from .operators import quadratures
from .states import DensityOperator

ArrayLike = Union[float, np.ndarray]

# Points evaluated per vectorized block in char_fn_numeric
_POINT_BLOCK = 64

# Complex entries per point block in char_fn_exact
_ELEMENT_BUDGET = 2 ** 21

# Mantissa bound before the Laguerre recurrence folds growth into the log scale
_RESCALE_LIMIT = 1e150


def weyl_beta(x: ArrayLike, y: ArrayLike) -> np.ndarray:
    """Displacement amplitude β with exp(ixq + iyp) = D(β)."""
    return (-np.asarray(y, dtype=float) + 1j * np.asarray(x, dtype=float)) / np.sqrt(2.0)


def weyl_xy(beta: complex) -> Tuple[float, float]:
    """Inverse of weyl_beta."""
    return float(np.sqrt(2.0) * beta.imag), float(-np.sqrt(2.0) * beta.real)


def coherent_amplitudes(alpha: complex, n_trunc: int) -> np.ndarray:
    """Amplitudes e^{-|α|²/2} αⁿ/√n! for n < n_trunc (not renormalized)."""
    out = np.empty(n_trunc, dtype=complex)
    out[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, n_trunc):
        out[n] = out[n - 1] * alpha / math.sqrt(n)
    return out


def coherent_matrix(alphas: np.ndarray, n_trunc: int) -> np.ndarray:
    """Coherent amplitudes for many α at once, shape (len(alphas), n_trunc)."""
    alphas = np.asarray(alphas, dtype=complex).reshape(-1)
    out = np.empty((alphas.size, n_trunc), dtype=complex)
    out[:, 0] = np.exp(-0.5 * np.abs(alphas) ** 2)
    for n in range(1, n_trunc):
        out[:, n] = out[:, n - 1] * alphas / math.sqrt(n)
    return out


def displacement_diagonals(betas: np.ndarray, n_trunc: int):
    """Yield (j, lower, upper) with lower[p, k] = <j+k|D(β_p)|j> and upper[p, k] = <j|D(β_p)|j+k>.

    Entries are built from the normalized Laguerre functions
    f_j^(k) = √(j!/(j+k)!) |β|^k e^{-|β|²/2} L_j^(k)(|β|²), advanced in j with
    the three-term recurrence. Each point carries its own log scale so the
    start value e^{-|β|²/2}|β|^k/√k! never underflows the recurrence.
    Columns k ≥ n_trunc − j fall outside the block and are left to the caller.
    """
    betas = np.asarray(betas, dtype=complex).reshape(-1)
    x = np.abs(betas) ** 2
    k = np.arange(n_trunc, dtype=float)
    with np.errstate(divide="ignore"):
        log_start = 0.5 * xlogy(k[None, :], x[:, None]) - 0.5 * x[:, None] - 0.5 * gammaln(k + 1.0)[None, :]
    log_scale = np.where(np.isfinite(log_start), log_start, 0.0)
    current = np.where(np.isfinite(log_start), 1.0, 0.0)
    previous = np.zeros_like(current)

    angle = np.angle(betas)[:, None]
    lower_phase = np.exp(1j * k[None, :] * angle)
    upper_phase = (-1.0) ** k[None, :] * np.conj(lower_phase)

    for j in range(n_trunc):
        values = current * np.exp(log_scale)
        yield j, values * lower_phase, values * upper_phase
        step = ((2 * j + 1) + k[None, :] - x[:, None]) * current - np.sqrt(j * (j + k))[None, :] * previous
        previous, current = current, step / np.sqrt((j + 1) * (j + k + 1))[None, :]
        big = np.abs(current) > _RESCALE_LIMIT
        if np.any(big):
            factor = np.where(big, _RESCALE_LIMIT, 1.0)
            current, previous = current / factor, previous / factor
            log_scale = log_scale + np.log(factor)


def displacement_elements(beta: complex, n_trunc: int) -> np.ndarray:
    """Matrix <m|D(β)|n> for m, n < n_trunc."""
    out = np.empty((n_trunc, n_trunc), dtype=complex)
    for j, lower, upper in displacement_diagonals(np.array([beta]), n_trunc):
        width = n_trunc - j
        out[j:, j] = lower[0, :width]
        out[j, j:] = upper[0, :width]
    return out


def char_fn_exact(rho: DensityOperator, x: ArrayLike, y: ArrayLike) -> np.ndarray:
    """tr(ρ D(β)) from exact displacement matrix elements, vectorized over points."""
    if rho.mode_count != 1:
        raise DimensionError("characteristic functions are single-mode here")
    x_arr, y_arr = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    betas = weyl_beta(x_arr, y_arr).reshape(-1)
    values = np.zeros(betas.size, dtype=complex)
    matrix = rho.matrix
    n = rho.n_trunc
    block = max(1, _ELEMENT_BUDGET // n)
    for start in range(0, betas.size, block):
        chunk = slice(start, start + block)
        for j, lower, upper in displacement_diagonals(betas[chunk], n):
            width = n - j
            # tr(ρD) = Σ D_{mn} ρ_{nm}
            values[chunk] += lower[:, :width] @ matrix[j, j:] + upper[:, 1:width] @ matrix[j + 1:, j]
    return values.reshape(x_arr.shape)


@lru_cache(maxsize=16)
def _quadrature_eigensystem(n_work: int) -> Tuple[np.ndarray, np.ndarray]:
    q, _ = quadratures(n_work)
    eigenvalues, eigenvectors = np.linalg.eigh(q)
    eigenvalues.setflags(write=False)
    eigenvectors.setflags(write=False)
    return eigenvalues, eigenvectors


def working_dimension(n_trunc: int, radius: float) -> int:
    """Padded dimension for exp(it q_θ) at |(x, y)| = radius, rounded up to a multiple of 32."""
    needed = n_trunc + int(math.ceil(radius ** 2 + 10.0 * radius)) + 20
    return int(32 * math.ceil(needed / 32))


def char_fn_numeric(rho: DensityOperator, x: ArrayLike, y: ArrayLike) -> Union[complex, np.ndarray]:
    """χ_ρ(x, y) = tr(ρ exp(ixq + iyp)) by exponentiating the truncated generator.

    xq + yp = t q_θ with t = √(x²+y²) and q_θ = R q R†, R = exp(iθ a†a). The
    truncated q is diagonalized once per padded dimension and ρ is embedded
    in the padded space, so exp(it q_θ) = R V exp(itΛ) V† R†.

    Args:
        rho: Single-mode density operator
        x: Position argument (scalar or array)
        y: Momentum argument, broadcast against x

    Returns:
        Complex scalar for scalar input, otherwise an array of the broadcast shape
    """
    if rho.mode_count != 1:
        raise DimensionError("char_fn_numeric needs a single-mode state")
    scalar = np.ndim(x) == 0 and np.ndim(y) == 0
    x_arr, y_arr = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    xs, ys = x_arr.reshape(-1), y_arr.reshape(-1)
    radii = np.hypot(xs, ys)
    thetas = np.arctan2(ys, xs)
    n = rho.n_trunc
    values = np.empty(xs.size, dtype=complex)
    levels = np.arange(n, dtype=float)

    dims = np.array([working_dimension(n, t) for t in radii])
    for n_work in np.unique(dims):
        eigenvalues, eigenvectors = _quadrature_eigensystem(int(n_work))
        head = eigenvectors[:n, :]
        members = np.flatnonzero(dims == n_work)
        for start in range(0, members.size, _POINT_BLOCK):
            block = members[start:start + _POINT_BLOCK]
            phases = np.exp(1j * thetas[block][:, None] * levels[None, :])
            rotated = np.conj(phases)[:, :, None] * rho.matrix[None, :, :] * phases[:, None, :]
            diagonal = np.einsum("mk,pmn,nk->pk", np.conj(head), rotated, head, optimize=True)
            weights = np.exp(1j * radii[block][:, None] * eigenvalues[None, :])
            values[block] = np.sum(weights * diagonal, axis=1)

    if scalar:
        return complex(values[0])
    return values.reshape(x_arr.shape)
