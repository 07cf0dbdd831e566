"""Minimal-energy superposition Ω₊ of the maximally distant isoenergetic pair."""

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ..config.settings import OmegaSettings, QuadratureSpec, settings
from ..exceptions import DegenerateSuperpositionError, DomainError, DimensionError
from ..fock.operators import squeeze
from ..fock.phase_space import coherent_amplitudes, coherent_matrix
from ..fock.states import DensityOperator, FockVector
from ..fock.truncation import converge_truncation, energy_truncation
from ..utils.logging import get_logger
from ..utils.quadrature import adaptive_trapezoid
from .charfn import OmegaCharFn
from .gaussian import DistantPair, GaussianPure, max_distant_pair

logger = get_logger(__name__)

ALL_EQUAL = "all-equal"

# Relative gap between Ez and c below which every phase gives the same energy
_PHASE_TIE = 1e-12

# Hermite recurrence rescaling threshold
_HERMITE_GUARD = 1e250


def superposition_energy(E: float, z: float, c: float, lam: float, theta: float) -> float:
    """⟨H⟩ of |ψ₁⟩ + λe^{iθ}|ψ₂⟩ for isoenergetic branches.

    (E(1+λ²) + 2λc cosθ) / (1 + λ² + 2zλ cosθ), with z the real branch
    overlap and c the real cross energy ⟨ψ₁|H|ψ₂⟩.

    Raises:
        DomainError: If λ < 0
        DegenerateSuperpositionError: If the normalization vanishes
    """
    if lam < 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    denominator = 1.0 + lam * lam + 2.0 * z * lam * math.cos(theta)
    if denominator <= 1e-12:
        raise DegenerateSuperpositionError(
            f"superposition norm {denominator:.3e} vanishes (z={z}, lambda={lam}, theta={theta})"
        )
    return (E * (1.0 + lam * lam) + 2.0 * lam * c * math.cos(theta)) / denominator


def minimal_energy_phase(E: float, z: float, c: float) -> Union[float, str]:
    """Relative phase minimizing ⟨H⟩; the minimum always sits at λ = 1.

    Returns:
        0.0 if Ez > c, π if Ez < c, ``ALL_EQUAL`` if Ez and c agree to a relative 1e-12

    Raises:
        DomainError: If z is outside [0, 1]
    """
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"overlap z must lie in [0, 1], got {z}")
    gap = E * z - c
    if abs(gap) <= _PHASE_TIE * max(abs(E * z), abs(c)):
        return ALL_EQUAL
    return 0.0 if gap > 0 else math.pi


def branch_cross_energy(gamma: float, w: float) -> float:
    """⟨γ|S(w)† a†a S(w)|−γ⟩ = e^{−2γ²}(sinh²w − γ²e^{2w}) for real γ, w."""
    return math.exp(-2.0 * gamma ** 2) * (math.sinh(w) ** 2 - gamma ** 2 * math.exp(2.0 * w))


@dataclass(frozen=True)
class OmegaState:
    """Squeezed cat S(w)(|γ⟩ ± |−γ⟩) at energy constraint E.

    ``branch_displacement`` = γe^{−w} is the displacement of each Gaussian
    branch, so the branches are |(±branch_displacement, w)⟩.

    Attributes:
        E: Energy constraint
        pair: Distant pair at E
        fock: Normalized Fock realization
        norm_const: 1/‖S(w)(|γ⟩ ± |−γ⟩)‖ computed from the assembled vector
        e_tilde: ⟨a†a⟩ of the realization
        gamma: Cat amplitude before squeezing
        branch: "+" or "-"
        tail_mass: Probability in the truncation margin
    """

    E: float
    pair: DistantPair
    fock: FockVector
    norm_const: float
    e_tilde: float
    gamma: float
    branch: str = "+"
    tail_mass: float = 0.0

    @property
    def w(self) -> float:
        return self.pair.w

    @property
    def n_trunc(self) -> int:
        return self.fock.n_trunc

    @property
    def branch_displacement(self) -> float:
        return self.gamma * math.exp(-self.w)

    @property
    def branches(self):
        return (GaussianPure(alpha=self.branch_displacement, w=self.w),
                GaussianPure(alpha=-self.branch_displacement, w=self.w))

    def branch_energy(self) -> float:
        return self.branch_displacement ** 2 + math.sinh(self.w) ** 2

    def density(self) -> DensityOperator:
        return self.fock.to_density()

    def char_fn(self) -> OmegaCharFn:
        return OmegaCharFn(gamma=self.gamma, w=self.w, branch=self.branch)

    def probabilities(self) -> np.ndarray:
        return self.fock.probabilities()

    def resized(self, n_trunc: int) -> FockVector:
        return self.fock.resized(n_trunc)


def cat_amplitude(pair: DistantPair, convention: str) -> float:
    """γ for the configured convention: r_c·√d_c (isoenergetic) or r_c (fock_table)."""
    if convention == "isoenergetic":
        return pair.gamma_c
    if convention == "fock_table":
        return pair.r_c
    raise ValueError(f"unknown cat amplitude convention {convention!r}")


def _squeezed_cat(gamma: float, w: float, sign: float, n: int, allow_truncation_risk: bool) -> np.ndarray:
    cat = coherent_amplitudes(gamma, n) + sign * coherent_amplitudes(-gamma, n)
    return squeeze(w, n, allow_truncation_risk) @ cat


def build_omega(
    E: float,
    n_trunc: Optional[int] = None,
    omega: Optional[OmegaSettings] = None,
    allow_truncation_risk: bool = False,
) -> OmegaState:
    """Fock realization of Ω₊ (or Ω₋ when configured) at energy constraint E.

    Args:
        E: Energy constraint
        n_trunc: Explicit truncation; chosen adaptively when omitted
        omega: Branch and cat-amplitude convention (defaults to global settings)
        allow_truncation_risk: Override the squeeze guard at an explicit n_trunc

    Raises:
        DomainError: If E < 0
        DegenerateSuperpositionError: For the odd branch at E = 0
        TruncationRiskError: If the guard fails or truncation does not converge
    """
    pair = max_distant_pair(E)
    omega = omega or settings.omega
    gamma = cat_amplitude(pair, omega.cat_amplitude)
    sign = 1.0 if omega.branch == "+" else -1.0
    if sign < 0 and gamma ** 2 < 1e-8:
        raise DegenerateSuperpositionError(f"odd superposition at E={E} has vanishing norm")

    if E > 0:
        branch_energy = (gamma * math.exp(-pair.w)) ** 2 + math.sinh(pair.w) ** 2
        z = math.exp(-2.0 * gamma ** 2)
        phase = minimal_energy_phase(branch_energy, z, branch_cross_energy(gamma, pair.w))
        logger.debug(f"E={E}: branch overlap {z:.6e}, minimal-energy phase {phase}")
        if omega.branch == "+" and phase != 0.0:
            logger.warning(f"E={E}: minimal-energy phase is {phase}, not the even branch")

    raw: dict = {}

    def build(n: int) -> FockVector:
        vector = _squeezed_cat(gamma, pair.w, sign, n, allow_truncation_risk)
        norm = float(np.linalg.norm(vector))
        if norm <= 1e-300:
            raise DegenerateSuperpositionError(f"superposition at E={E} has vanishing norm")
        raw[n] = norm
        return FockVector.from_amplitudes(vector / norm, normalize=False)

    if n_trunc is not None:
        fock = build(n_trunc)
        tail = fock.tail_mass(settings.truncation.margin_fraction)
    else:
        start = max(energy_truncation(E, settings.truncation.n_start), int(4 * pair.d_c) + 1)
        converged = converge_truncation(build, n_start=start, label=f"omega(E={E})")
        fock, tail = converged.state, converged.tail_mass

    state = OmegaState(E=float(E), pair=pair, fock=fock, norm_const=1.0 / raw[fock.n_trunc],
                       e_tilde=fock.mean_photon_number(), gamma=gamma, branch=omega.branch, tail_mass=tail)
    logger.debug(f"Built omega E={E} at n_trunc={fock.n_trunc}: e_tilde={state.e_tilde:.8f}, p0={fock.probabilities()[0]:.6f}")
    return state


def fock_amplitudes_closed_form(gamma: float, w: float, n_max: int, branch: str = "+") -> np.ndarray:
    """⟨n|Ψ⟩ for Ψ ∝ S(w)(|γ⟩ ± |−γ⟩), n = 0..n_max−1.

    Even branch, even n:
        (tanh w/2)^{n/2} e^{γ² tanh w/2} H_n(γ/√sinh 2w) / (√n! √(cosh w cosh γ²))
    The odd branch replaces cosh γ² by sinh γ² and keeps odd n instead.
    (tanh w/2)^{n/2} H_n/√n! is carried through a rescaled three-term
    recurrence so neither factor overflows.

    Raises:
        DomainError: If w <= 0
        DimensionError: If n_max < 2
    """
    if w <= 0:
        raise DomainError(f"closed-form amplitudes need w > 0, got {w}")
    if n_max < 2:
        raise DimensionError(f"n_max must be at least 2, got {n_max}")
    if branch == "-" and gamma == 0:
        raise DegenerateSuperpositionError("odd superposition with gamma=0")

    t = math.tanh(w)
    u = gamma / math.sqrt(math.sinh(2.0 * w))
    s = math.sqrt(t / 2.0)

    scaled = np.zeros(n_max)
    log_scale = np.zeros(n_max)
    prev, current, scale = 0.0, 1.0, 0.0
    scaled[0] = 1.0
    for n in range(1, n_max):
        # h_n = (t/2)^{n/2} H_n(u)/√n!
        nxt = 2.0 * u * s / math.sqrt(n) * current
        if n >= 2:
            nxt -= 2.0 * (n - 1) * (t / 2.0) / math.sqrt(n * (n - 1)) * prev
        prev, current = current, nxt
        if max(abs(prev), abs(current)) > _HERMITE_GUARD:
            prev /= _HERMITE_GUARD
            current /= _HERMITE_GUARD
            scale += math.log(_HERMITE_GUARD)
        scaled[n] = current
        log_scale[n] = scale

    if branch == "+":
        log_norm = gamma ** 2 * t / 2.0 - 0.5 * math.log(math.cosh(w)) - 0.5 * math.log(math.cosh(gamma ** 2))
        keep = np.arange(n_max) % 2 == 0
    else:
        log_norm = gamma ** 2 * t / 2.0 - 0.5 * math.log(math.cosh(w)) - 0.5 * math.log(math.sinh(gamma ** 2))
        keep = np.arange(n_max) % 2 == 1
    amplitudes = np.where(keep, scaled * np.exp(log_scale + log_norm), 0.0)
    return amplitudes


def char_fn_closed_form(gamma: float, w: float, branch: str = "+") -> OmegaCharFn:
    """Closed-form characteristic function of S(w)(|γ⟩ ± |−γ⟩)."""
    return OmegaCharFn(gamma=gamma, w=w, branch=branch)


def _line_integral(r: float, d: float, n_trunc: int, quadrature: QuadratureSpec, label: str) -> np.ndarray:
    width = d - 1.0

    def integrand(x: np.ndarray) -> np.ndarray:
        weight = np.exp(-x * x / width)[:, None]
        plus = np.exp(-1j * r * x)[:, None] * coherent_matrix(r + 1j * x, n_trunc)
        if r == 0:
            return weight * plus
        minus = np.exp(1j * r * x)[:, None] * coherent_matrix(-r + 1j * x, n_trunc)
        return weight * (plus + minus)

    estimate, level, change = adaptive_trapezoid(
        integrand,
        half_width=quadrature.half_width_factor * math.sqrt(width),
        initial_nodes=quadrature.initial_nodes,
        tolerance=quadrature.tolerance,
        accuracy_limit=quadrature.accuracy_limit,
        max_refinements=quadrature.max_refinements,
        label=label,
    )
    logger.debug(f"{label}: {level} halvings, change {change:.2e}")
    return estimate


def line_integral_representation(
    r: float,
    d: float,
    quadrature: Optional[QuadratureSpec] = None,
    n_trunc: Optional[int] = None,
) -> FockVector:
    """Normalized |(r, ½ln d)⟩ + |(−r, ½ln d)⟩ from coherent states on the lines ±r + ix.

    ∝ ∫dx e^{−x²/(d−1)} [e^{−irx}|r+ix⟩ + e^{irx}|−r+ix⟩]; the normalization is
    taken from the integrated vector.

    Raises:
        DomainError: If d <= 1 or r < 0
        AccuracyError: If successive halvings disagree by more than the accuracy limit
    """
    if d <= 1.0:
        raise DomainError(f"line integral needs d > 1, got {d}")
    if r < 0:
        raise DomainError(f"line integral needs r >= 0, got {r}")
    quadrature = quadrature or settings.quadrature
    w = 0.5 * math.log(d)

    def build(n: int) -> FockVector:
        vector = _line_integral(r, d, n, quadrature, f"line integral (r={r:.4g}, d={d:.4g})")
        return FockVector.from_amplitudes(vector, normalize=True)

    if n_trunc is not None:
        return build(n_trunc)
    energy = r * r + math.sinh(w) ** 2
    start = max(energy_truncation(energy, settings.truncation.n_start), int(4 * d) + 1)
    return converge_truncation(build, n_start=start, label="line integral").state


def squeezed_vacuum_line_integral(
    w: float,
    n_trunc: int,
    quadrature: Optional[QuadratureSpec] = None,
) -> FockVector:
    """S(w)|0⟩ = e^{w/2}/√(π(e^{2w}−1)) ∫dx e^{−x²/(e^{2w}−1)} D(ix)|0⟩, not renormalized.

    Raises:
        DomainError: If w <= 0
    """
    if w <= 0:
        raise DomainError(f"squeezed vacuum line integral needs w > 0, got {w}")
    quadrature = quadrature or settings.quadrature
    d = math.exp(2.0 * w)
    vector = _line_integral(0.0, d, n_trunc, quadrature, f"squeezed vacuum line integral (w={w:.4g})")
    prefactor = math.exp(w / 2.0) / math.sqrt(math.pi * (d - 1.0))
    return FockVector.from_amplitudes(prefactor * vector, normalize=False)
