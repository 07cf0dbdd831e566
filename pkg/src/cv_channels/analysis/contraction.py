"""Trace-norm tools and the Z2-covariance lower bound on the contraction coefficient.

For a Z2-covariant channel Ξ and a hull diameter (ρ₁, ρ₂ = Pρ₁P), the
heterodyne measurement gives

    τ(Ξ) ≥ ∫(d²α/π) |Q_{Ξ(ρ₁)}(α) − Q_{Ξ(ρ₁)}(−α)| / ‖ρ₁ − ρ₂‖₁

because Q_{Ξ(ρ₂)}(α) = Q_{Ξ(ρ₁)}(−α).
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np

from ..channels.operations import apply_channel
from ..channels.spec import ChannelSpec
from ..config.settings import PolarQuadratureSettings, settings
from ..exceptions import DomainError, ValidityError
from ..fock.phase_space import coherent_matrix
from ..fock.states import DensityOperator
from ..states.gaussian import max_distant_pair, to_fock
from ..utils.logging import get_logger
from ..utils.quadrature import find_cutoff_radius, polar_nodes
from ..utils.refinement import refine_until_stable

logger = get_logger(__name__)


@dataclass(frozen=True)
class ContractionReport:
    """Diameter-based lower bound on τ(Ξ) at energy constraint E.

    ``output_distance`` is ‖Ξ(ρ₁) − Ξ(ρ₂)‖₁ with Ξ(ρ₂) taken as the parity
    image of Ξ(ρ₁); the heterodyne integral never exceeds it.
    """

    E: float
    channel: ChannelSpec
    diameter_distance: float
    q_integral: float
    tau_lower: float
    output_distance: float
    n_trunc: int
    quadrature_level: int
    quadrature_change: float
    radius: float


def _common(rho: DensityOperator, sigma: DensityOperator) -> Tuple[np.ndarray, np.ndarray]:
    if rho.mode_count != sigma.mode_count:
        raise ValidityError("trace distance needs states with the same number of modes")
    if rho.n_trunc == sigma.n_trunc:
        return rho.matrix, sigma.matrix
    n = max(rho.n_trunc, sigma.n_trunc)
    return rho.resized(n).matrix, sigma.resized(n).matrix


def trace_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    """‖ρ − σ‖₁, the sum of absolute eigenvalues of the difference.

    Single-mode states of different truncation are zero-padded to match.

    Raises:
        ValidityError: If the difference is not Hermitian within 1e-8
    """
    a, b = _common(rho, sigma)
    difference = a - b
    defect = float(np.max(np.abs(difference - difference.conj().T))) if difference.size else 0.0
    if defect > 1e-8:
        raise ValidityError(f"difference of states is not Hermitian (deviation {defect:.2e})")
    eigenvalues = np.linalg.eigvalsh(0.5 * (difference + difference.conj().T))
    return float(min(2.0, np.sum(np.abs(eigenvalues))))


def husimi_q(rho: DensityOperator, alpha: Union[complex, np.ndarray]) -> Union[float, np.ndarray]:
    """Q(α) = ⟨α|ρ|α⟩ for one amplitude or an array of them."""
    alphas = np.asarray(alpha, dtype=complex)
    kets = coherent_matrix(alphas.reshape(-1), rho.n_trunc)
    values = np.real(np.einsum("pm,mn,pn->p", kets.conj(), rho.matrix, kets, optimize=True))
    values = np.clip(values, 0.0, None)
    if alphas.ndim == 0:
        return float(values[0])
    return values.reshape(alphas.shape)


def _plane_integral(
    integrand: Callable[[np.ndarray], np.ndarray],
    magnitude: Callable[[np.ndarray], np.ndarray],
    polar: PolarQuadratureSettings,
    label: str,
):
    radius = find_cutoff_radius(magnitude, polar.cutoff, polar.max_radius)

    def evaluate(level: int) -> float:
        nodes = polar_nodes(radius, polar.radial_nodes * 2 ** level, polar.angular_nodes * 2 ** level)
        total = 0.0
        for start in range(0, nodes.points.size, polar.chunk_size):
            chunk = slice(start, start + polar.chunk_size)
            total += float(np.dot(nodes.weights[chunk], integrand(nodes.points[chunk])))
        return total / math.pi

    result = refine_until_stable(evaluate, lambda a, b: abs(a - b), tolerance=polar.tolerance,
                                 max_refinements=polar.max_refinements, label=label, accept_within=1e-5)
    return result, radius


def q_normalization(rho: DensityOperator, polar: Optional[PolarQuadratureSettings] = None) -> float:
    """∫(d²α/π) Q(α), equal to tr ρ; a self-test of the plane quadrature."""
    polar = polar or settings.polar
    result, _ = _plane_integral(lambda a: husimi_q(rho, a), lambda a: husimi_q(rho, a), polar, "Q normalization")
    return float(result.value)


def diameter_pair(E: float) -> Tuple[DensityOperator, DensityOperator]:
    """Fock realizations of the maximally distant pair |(±r_c, w)⟩ at a common truncation.

    Raises:
        DomainError: If E < 0
    """
    first, second = max_distant_pair(E).members()
    v1, v2 = to_fock(first), to_fock(second)
    n = max(v1.n_trunc, v2.n_trunc)
    return v1.resized(n).to_density(), v2.resized(n).to_density()


def tau_lower_bound(
    E: float,
    spec: ChannelSpec,
    backend: str = "auto",
    polar: Optional[PolarQuadratureSettings] = None,
) -> ContractionReport:
    """Heterodyne lower bound on τ(Ξ) from the hull diameter at energy E.

    Only ρ₁ is sent through the channel; Ξ(ρ₂) is its parity image.

    Raises:
        DomainError: If E ≤ 0 or the channel is not Z2-covariant
        AccuracyError: If the plane quadrature does not settle
    """
    if E <= 0:
        raise DomainError(f"the diameter at E={E} is degenerate; tau needs E > 0")
    if not spec.is_z2_covariant():
        raise DomainError(f"{spec.kind} channel is not Z2-covariant")
    polar = polar or settings.polar

    rho1, rho2 = diameter_pair(E)
    diameter = trace_distance(rho1, rho2)
    output = apply_channel(spec, rho1, backend)

    def asymmetry(alphas: np.ndarray) -> np.ndarray:
        return np.abs(husimi_q(output, alphas) - husimi_q(output, -alphas))

    result, radius = _plane_integral(asymmetry, lambda a: husimi_q(output, a), polar, f"tau lower bound (E={E})")
    q_integral = max(0.0, float(result.value))
    tau = q_integral / diameter
    output_distance = trace_distance(output, output.parity_conjugated())
    logger.info(f"tau lower bound for {spec.kind} at E={E}: {tau:.8f} (diameter {diameter:.8f})")
    return ContractionReport(
        E=float(E), channel=spec, diameter_distance=diameter, q_integral=q_integral, tau_lower=tau,
        output_distance=output_distance, n_trunc=output.n_trunc, quadrature_level=result.level,
        quadrature_change=result.change, radius=radius,
    )


def z2_image_defect(E: float, spec: ChannelSpec, backend: str = "auto") -> float:
    """‖Ξ(ρ₂) − PΞ(ρ₁)P‖₁ for the diameter pair at E."""
    rho1, rho2 = diameter_pair(E)
    image1 = apply_channel(spec, rho1, backend)
    image2 = apply_channel(spec, rho2, backend)
    return trace_distance(image2, image1.parity_conjugated())


def random_density(n_trunc: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityOperator:
    """Random mixed state G G†/tr(G G†) from a complex Gaussian matrix."""
    rank = rank or n_trunc
    g = rng.standard_normal((n_trunc, rank)) + 1j * rng.standard_normal((n_trunc, rank))
    matrix = g @ g.conj().T
    return DensityOperator(matrix=matrix / np.trace(matrix).real, n_trunc=n_trunc)


def data_processing_gap(
    spec: ChannelSpec,
    rho: DensityOperator,
    sigma: DensityOperator,
    backend: str = "auto",
) -> float:
    """‖Ξ(ρ) − Ξ(σ)‖₁ − ‖ρ − σ‖₁, which is at most zero up to numerical error."""
    return trace_distance(apply_channel(spec, rho, backend), apply_channel(spec, sigma, backend)) - trace_distance(rho, sigma)
