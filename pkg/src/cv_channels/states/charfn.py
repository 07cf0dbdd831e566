"""Evaluable characteristic functions χ(x, y) = tr(ρ exp(ixq + iyp)).

Every variant returns complex values for scalar or array arguments and
exposes ``log_abs`` so envelope comparisons can be done in log space where
a closed form allows it.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..config.settings import PolarQuadratureSettings, settings
from ..exceptions import DegenerateSuperpositionError, DimensionError
from ..fock.phase_space import char_fn_exact, displacement_diagonals
from ..fock.states import DensityOperator
from ..utils.logging import get_logger
from ..utils.quadrature import find_cutoff_radius, polar_nodes
from ..utils.refinement import refine_until_stable

logger = get_logger(__name__)

ArrayLike = Union[float, np.ndarray]


def _logcosh(u: np.ndarray) -> np.ndarray:
    u = np.abs(u)
    return u + np.log1p(np.exp(-2.0 * u)) - math.log(2.0)


class CharFn(ABC):
    """Characteristic function of a single-mode state or channel output."""

    #: True when evaluate is a closed form rather than a Fock-space computation
    exact: bool = True

    @abstractmethod
    def evaluate(self, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        """Complex values at the broadcast points (x, y)."""
        pass

    def log_abs(self, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        """log|χ(x, y)|; variants override this with an overflow-free form."""
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.evaluate(x, y)))

    def __call__(self, x: ArrayLike, y: ArrayLike) -> Union[complex, np.ndarray]:
        values = self.evaluate(x, y)
        if np.ndim(values) == 0:
            return complex(values)
        return values

    def scaled(self, scale_x: float, scale_y: float) -> "ScaledProductCharFn":
        """x ↦ χ(scale_x·x, scale_y·y) as a one-factor product."""
        return ScaledProductCharFn(factors=((self, scale_x, scale_y),))


@dataclass(frozen=True, eq=False)
class GaussianCharFn(CharFn):
    """exp(i(x m_q + y m_p) − ½ vᵀ V v) with v = (x, y).

    A covariance N·I with zero mean is the classical-noise factor.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float).reshape(2)
        cov = np.asarray(self.cov, dtype=float).reshape(2, 2)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", 0.5 * (cov + cov.T))

    @classmethod
    def vacuum(cls) -> "GaussianCharFn":
        return cls(mean=np.zeros(2), cov=0.5 * np.eye(2))

    @classmethod
    def noise(cls, N: float) -> "GaussianCharFn":
        """Factor e^{−N(x²+y²)/2} of the classical-noise channel."""
        return cls(mean=np.zeros(2), cov=N * np.eye(2))

    def _exponent(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        (a, b), (_, d) = self.cov
        return -0.5 * (a * x * x + 2.0 * b * x * y + d * y * y)

    def evaluate(self, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return np.exp(self._exponent(x, y) + 1j * (self.mean[0] * x + self.mean[1] * y))

    def log_abs(self, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return self._exponent(x, y)


@dataclass(frozen=True, eq=False)
class OmegaCharFn(CharFn):
    """Squeezed cat S(w)(|γ⟩ ± |−γ⟩), normalized.

    χ = e^{−(e^{−2w}x²+e^{2w}y²)/4}·[cos(√2γe^{−w}x) ± e^{−2γ²}cosh(√2γe^{w}y)]/(1 ± e^{−2γ²})
    """

    gamma: float
    w: float
    branch: str = "+"

    def __post_init__(self) -> None:
        if self.branch not in ("+", "-"):
            raise ValueError(f"branch must be '+' or '-', got {self.branch!r}")
        if self.branch == "-" and 1.0 - math.exp(-2.0 * self.gamma ** 2) <= 1e-12:
            raise DegenerateSuperpositionError("odd superposition with vanishing amplitude has no normalization")

    @property
    def sign(self) -> float:
        return 1.0 if self.branch == "+" else -1.0

    def _parts(self, x: np.ndarray, y: np.ndarray):
        g, w = self.gamma, self.w
        envelope = -(math.exp(-2 * w) * x * x + math.exp(2 * w) * y * y) / 4.0
        phase = math.sqrt(2.0) * g * math.exp(-w) * x
        growth = math.sqrt(2.0) * g * math.exp(w) * y
        norm = 1.0 + self.sign * math.exp(-2.0 * g * g)
        return envelope, phase, growth, norm

    def evaluate(self, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        envelope, phase, growth, norm = self._parts(x, y)
        cross = np.exp(envelope - 2.0 * self.gamma ** 2 + _logcosh(growth))
        return (np.exp(envelope) * np.cos(phase) + self.sign * cross) / norm + 0j

    def log_abs(self, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        envelope, phase, growth, norm = self._parts(x, y)
        cross = -2.0 * self.gamma ** 2 + _logcosh(growth)
        top = np.maximum(cross, 0.0)
        with np.errstate(divide="ignore"):
            bracket = np.log(np.abs(np.cos(phase) * np.exp(-top) + self.sign * np.exp(cross - top))) + top
        return envelope + bracket - math.log(norm)


@dataclass(frozen=True, eq=False)
class ScaledProductCharFn(CharFn):
    """Π_k χ_k(s_x,k·x, s_y,k·y)."""

    factors: Tuple[Tuple[CharFn, float, float], ...]

    def __post_init__(self) -> None:
        if not self.factors:
            raise ValueError("a scaled product needs at least one factor")
        object.__setattr__(self, "factors", tuple((f, float(sx), float(sy)) for f, sx, sy in self.factors))
        object.__setattr__(self, "exact", all(f.exact for f, _, _ in self.factors))

    def evaluate(self, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        value = np.ones(x.shape, dtype=complex)
        for factor, sx, sy in self.factors:
            value = value * factor.evaluate(sx * x, sy * y)
        return value

    def log_abs(self, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        total = np.zeros(x.shape)
        for factor, sx, sy in self.factors:
            total = total + factor.log_abs(sx * x, sy * y)
        return total


@dataclass(frozen=True, eq=False)
class DensityCharFn(CharFn):
    """χ of a Fock-space density operator via exact displacement matrix elements."""

    rho: DensityOperator
    exact = False

    def __post_init__(self) -> None:
        if self.rho.mode_count != 1:
            raise DimensionError("DensityCharFn needs a single-mode state")

    def evaluate(self, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        return char_fn_exact(self.rho, x, y)


def product(factors: Sequence[Tuple[CharFn, float, float]]) -> ScaledProductCharFn:
    """Flatten nested scaled products into one factor list."""
    flat = []
    for factor, sx, sy in factors:
        if isinstance(factor, ScaledProductCharFn):
            flat.extend((inner, sx * ix, sy * iy) for inner, ix, iy in factor.factors)
        else:
            flat.append((factor, sx, sy))
    return ScaledProductCharFn(factors=tuple(flat))


def _reconstruct_once(charfn: CharFn, n_trunc: int, radius: float, radial: int, angular: int, chunk: int) -> np.ndarray:
    nodes = polar_nodes(radius, radial, angular)
    out = np.zeros((n_trunc, n_trunc), dtype=complex)
    for start in range(0, nodes.points.size, chunk):
        betas = nodes.points[start:start + chunk]
        x, y = math.sqrt(2.0) * betas.imag, -math.sqrt(2.0) * betas.real
        coefficients = nodes.weights[start:start + chunk] * charfn.evaluate(x, y) / math.pi
        for j, lower, upper in displacement_diagonals(-betas, n_trunc):
            width = n_trunc - j
            out[j:, j] += coefficients @ lower[:, :width]
            out[j, j + 1:] += coefficients @ upper[:, 1:width]
    return out


def reconstruct_density(
    charfn: CharFn,
    n_trunc: int,
    polar: Optional[PolarQuadratureSettings] = None,
) -> DensityOperator:
    """ρ = (1/π)∫d²β χ(β) D(−β) on the truncated Fock block.

    The outer radius is where |χ| drops below ``polar.cutoff``; radial and
    angular node counts double until the elementwise change falls below
    ``polar.reconstruction_tolerance``.

    Raises:
        AccuracyError: If no cutoff radius is found or refinement does not settle
    """
    polar = polar or settings.polar

    def magnitude(betas: np.ndarray) -> np.ndarray:
        return np.abs(charfn.evaluate(math.sqrt(2.0) * betas.imag, -math.sqrt(2.0) * betas.real))

    radius = find_cutoff_radius(magnitude, polar.cutoff, polar.max_radius)
    # D(β) matrix elements up to n_trunc oscillate on a scale ~ 1/√n_trunc
    radial = max(polar.radial_nodes, int(2 * math.ceil(radius * math.sqrt(n_trunc))))
    angular = max(polar.angular_nodes, 2 * n_trunc + 16)

    result = refine_until_stable(
        lambda level: _reconstruct_once(charfn, n_trunc, radius, radial * 2 ** level, angular * 2 ** level,
                                        polar.chunk_size),
        lambda a, b: float(np.max(np.abs(a - b))),
        tolerance=polar.reconstruction_tolerance,
        max_refinements=polar.max_refinements,
        label="density reconstruction",
        accept_within=1e-7,
    )
    matrix = 0.5 * (result.value + result.value.conj().T)
    logger.debug(f"Reconstructed density at n_trunc={n_trunc}, radius {radius:.2f}, level {result.level}")
    return DensityOperator(matrix=matrix, n_trunc=n_trunc,
                           metadata={"quadrature_level": result.level, "quadrature_change": result.change,
                                     "cutoff_radius": radius})
