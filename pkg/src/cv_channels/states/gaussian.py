"""Single-mode pure Gaussian states |(α, w)⟩ = D(α)S(w)|0⟩ and the maximally distant isoenergetic pair."""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..config.settings import OptimizerSettings, settings
from ..exceptions import DomainError
from ..fock.operators import displacement, squeeze
from ..fock.states import FockVector
from ..fock.truncation import converge_truncation, energy_truncation
from ..utils.logging import get_logger
from ..utils.optimize import multistart_minimize

logger = get_logger(__name__)


@dataclass(frozen=True)
class GaussianPure:
    """Displaced squeezed vacuum.

    Attributes:
        alpha: Displacement amplitude
        w: Squeezing parameter z = |z|e^{iθ}; real for the pair construction
    """

    alpha: complex = 0.0
    w: complex = 0.0

    @property
    def squeeze_magnitude(self) -> float:
        return abs(complex(self.w))

    def energy(self) -> float:
        """Mean photon number |α|² + sinh²|w|."""
        return abs(complex(self.alpha)) ** 2 + math.sinh(self.squeeze_magnitude) ** 2

    def mean(self) -> np.ndarray:
        """(⟨q⟩, ⟨p⟩)."""
        alpha = complex(self.alpha)
        return np.sqrt(2.0) * np.array([alpha.real, alpha.imag])

    def covariance(self) -> np.ndarray:
        """Symmetrized quadrature covariance; the vacuum has I/2."""
        r = self.squeeze_magnitude
        theta = float(np.angle(complex(self.w))) if r > 0 else 0.0
        ch, sh = math.cosh(2 * r), math.sinh(2 * r)
        return 0.5 * np.array([
            [ch - sh * math.cos(theta), -sh * math.sin(theta)],
            [-sh * math.sin(theta), ch + sh * math.cos(theta)],
        ])

    def char_fn(self):
        """Gaussian characteristic function of this state."""
        from .charfn import GaussianCharFn

        return GaussianCharFn(mean=self.mean(), cov=self.covariance())

    def parity_partner(self) -> "GaussianPure":
        """e^{iπa†a}|(α, w)⟩ = |(−α, w)⟩."""
        return GaussianPure(alpha=-complex(self.alpha), w=self.w)

    def _wavefunction_parameters(self) -> Tuple[complex, float, float, float, float]:
        r = self.squeeze_magnitude
        tau = np.exp(1j * np.angle(complex(self.w))) * math.tanh(r) if r > 0 else 0.0
        kappa = complex((1 + tau) / (1 - tau))
        phase = 0.5 * float(np.angle(1 - tau))
        norm = (kappa.real / math.pi) ** 0.25
        q0, p0 = self.mean()
        return kappa, float(norm), phase, float(q0), float(p0)


def to_fock(g: GaussianPure, n_trunc: Optional[int] = None, allow_truncation_risk: bool = False) -> FockVector:
    """Fock realization D(α)S(w)|0⟩.

    Args:
        g: Gaussian state parameters
        n_trunc: Explicit truncation; chosen adaptively when omitted
        allow_truncation_risk: Pass-through override of the operator guards

    Raises:
        TruncationRiskError: If an operator guard fails at an explicit n_trunc
    """
    def build(n: int) -> FockVector:
        squeezed = squeeze(complex(g.w), n, allow_truncation_risk)[:, 0]
        amplitudes = displacement(complex(g.alpha), n, allow_truncation_risk) @ squeezed
        return FockVector.from_amplitudes(amplitudes, normalize=True)

    if n_trunc is not None:
        return build(n_trunc)
    start = energy_truncation(g.energy(), settings.truncation.n_start)
    return converge_truncation(build, n_start=start, label=f"gaussian(alpha={g.alpha}, w={g.w})").state


def overlap(g1: GaussianPure, g2: GaussianPure) -> complex:
    """⟨(α₁, w₁)|(α₂, w₂)⟩ from the position-space wavefunctions.

    ψ(q) = N c exp(−κ(q−q₀)²/2 + i p₀ q − i q₀p₀/2) with κ = (1+τ)/(1−τ),
    τ = e^{iθ}tanh r, and the phase of c fixed by ⟨0|S(z)|0⟩ > 0.
    """
    kappa1, n1, phi1, q1, p1 = g1._wavefunction_parameters()
    kappa2, n2, phi2, q2, p2 = g2._wavefunction_parameters()
    k1 = np.conj(kappa1)
    a = 0.5 * (k1 + kappa2)
    b = k1 * q1 + kappa2 * q2 + 1j * (p2 - p1)
    c = -0.5 * (k1 * q1 ** 2 + kappa2 * q2 ** 2) + 0.5j * (q1 * p1 - q2 * p2)
    value = np.exp(1j * (phi1 - phi2)) * n1 * n2 * np.sqrt(np.pi / a) * np.exp(b ** 2 / (4 * a) + c)
    return complex(value)


def fidelity(g1: GaussianPure, g2: GaussianPure) -> float:
    return abs(overlap(g1, g2)) ** 2


@dataclass(frozen=True)
class DistantPair:
    """Minimal-fidelity isoenergetic pair |(±r_c, w)⟩ at energy E."""

    E: float
    d_c: float
    r_c: float
    w: float
    gamma_c: float

    def members(self) -> Tuple[GaussianPure, GaussianPure]:
        return GaussianPure(alpha=self.r_c, w=self.w), GaussianPure(alpha=-self.r_c, w=self.w)

    def overlap(self) -> float:
        """⟨(r_c, w)|(−r_c, w)⟩ = e^{−2γ_c²}."""
        return math.exp(-2.0 * self.gamma_c ** 2)


def max_distant_pair(E: float) -> DistantPair:
    """Parameters d_c = 2E+1, r_c = √((E²+E)/(2E+1)), w = ½ ln d_c, γ_c = r_c√d_c.

    Raises:
        DomainError: If E < 0
    """
    if E < 0 or not math.isfinite(E):
        raise DomainError(f"energy constraint must be a nonnegative number, got {E}")
    d_c = 2.0 * E + 1.0
    r_c = math.sqrt((E * E + E) / d_c)
    return DistantPair(E=float(E), d_c=d_c, r_c=r_c, w=0.5 * math.log(d_c), gamma_c=r_c * math.sqrt(d_c))


@dataclass(frozen=True)
class FidelityReport:
    """Outcome of the numerical minimal-fidelity search.

    ``converged`` is False when the winning local search did not report
    success; ``diagnostic`` then carries the optimizer message.
    """

    E: float
    alpha1: float
    w1: float
    alpha2: float
    w2: float
    fidelity: float
    d: float
    r: float
    expected_d: float
    expected_r: float
    d_gap: float
    r_gap: float
    converged: bool
    n_starts: int
    diagnostic: str = ""


def fidelity_minimality_check(E: float, optimizer: Optional[OptimizerSettings] = None) -> FidelityReport:
    """Minimize |⟨(α₁,w₁)|(α₂,w₂)⟩|² over real isoenergetic pairs.

    Each member is parameterized by its squeezing w_j with α_j = s_j√(E − sinh²w_j).
    Starts sit on a lattice of 8 squeezing values d = e^{2w} times the sign
    configurations (+,−) and (+,+); ties go to the smallest d.

    Raises:
        DomainError: If E < 0
    """
    pair = max_distant_pair(E)
    optimizer = optimizer or settings.optimizer
    if E == 0:
        return FidelityReport(E=0.0, alpha1=0.0, w1=0.0, alpha2=0.0, w2=0.0, fidelity=1.0,
                              d=1.0, r=0.0, expected_d=1.0, expected_r=0.0, d_gap=0.0, r_gap=0.0,
                              converged=True, n_starts=0, diagnostic="degenerate: every feasible pair is the vacuum")

    w_max = math.asinh(math.sqrt(E)) * (1.0 - 1e-9)
    sign_configs = [(1.0, -1.0), (1.0, 1.0)]
    per_config = max(1, optimizer.fidelity_starts // len(sign_configs))
    d_lattice = np.geomspace(1.0 + 1e-3, math.exp(2 * w_max), per_config)

    def state(w: float, sign: float) -> GaussianPure:
        alpha = sign * math.sqrt(max(0.0, E - math.sinh(w) ** 2))
        return GaussianPure(alpha=alpha, w=w)

    best = None
    best_signs = sign_configs[0]
    for signs in sign_configs:
        def objective(x: np.ndarray) -> float:
            value = fidelity(state(x[0], signs[0]), state(x[1], signs[1]))
            return math.log(max(value, 1e-300))

        starts = [[0.5 * math.log(d), 0.5 * math.log(d)] for d in d_lattice]
        result = multistart_minimize(
            objective, starts, bounds=[(-w_max, w_max)] * 2,
            tie_key=lambda x: float(np.exp(x[0] + x[1])),
            ftol=optimizer.ftol, gtol=optimizer.gtol, max_iterations=optimizer.max_iterations,
        )
        if best is None or result.fun < best.fun - 1e-12 or (
            abs(result.fun - best.fun) <= 1e-12 and np.exp(sum(result.x)) < np.exp(sum(best.x))
        ):
            best, best_signs = result, signs

    g1, g2 = state(best.x[0], best_signs[0]), state(best.x[1], best_signs[1])
    d = float(math.exp(best.x[0] + best.x[1]))
    r = 0.5 * (abs(g1.alpha) + abs(g2.alpha))
    report = FidelityReport(
        E=float(E), alpha1=float(g1.alpha), w1=float(best.x[0]), alpha2=float(g2.alpha), w2=float(best.x[1]),
        fidelity=float(math.exp(best.fun)), d=d, r=r,
        expected_d=pair.d_c, expected_r=pair.r_c,
        d_gap=abs(d - pair.d_c), r_gap=abs(r - pair.r_c),
        converged=best.converged, n_starts=2 * per_config,
        diagnostic="" if best.converged else best.message,
    )
    logger.info(f"Minimal fidelity at E={E}: d={d:.8f} (closed form {pair.d_c:.8f}), F={report.fidelity:.6e}")
    return report
