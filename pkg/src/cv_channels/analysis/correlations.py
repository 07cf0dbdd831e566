"""Entanglement and second-moment noise diagnostics."""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import quad

from ..channels.operations import apply_channel
from ..channels.spec import Amplifier, Environment, OmegaEnv
from ..config.settings import OmegaSettings
from ..exceptions import TruncationRiskError, ValidityError
from ..fock.operators import (
    Beamsplitter,
    apply_blocks,
    ladder_matrices,
    partial_trace,
    quadratures,
    reduced_from_vector,
    two_mode_blocks,
)
from ..fock.states import DensityOperator, FockVector
from ..states.gaussian import GaussianPure
from ..states.superposition import build_omega
from ..utils.logging import get_logger

logger = get_logger(__name__)

# Slack on purity above one before the state is rejected
_PURITY_SLACK = 1e-9

# Environment of the entropy rows: the cat of the distant pair at energy E
ENTROPY_OMEGA = OmegaSettings(branch="+", cat_amplitude="isoenergetic")


@dataclass(frozen=True)
class NoiseReport:
    """Mean second-moment noise before and after an amplifier.

    ``mu`` = ν_out/(g²·ν_in) is bounded below by 1/g².
    """

    nu_in: float
    nu_out: float
    gain_sq: float
    mu: float
    n_trunc: int
    backend: str = ""


@dataclass(frozen=True)
class EntropyRow:
    """Rényi-2 entropies after a 50:50 beamsplitter for three inputs of energy Ẽ."""

    E: float
    e_tilde: float
    s2_omega: float
    s2_squeezed: float
    s2_two_mode: float
    n_trunc: int
    tail_mass: float
    s2_omega_closed_form: float = float("nan")


@dataclass(frozen=True)
class NoiseExpansionRow:
    """μ for coherent and Ω₊ inputs of Ξ_r with an Ω₊ environment.

    The ``*_moments`` columns come from ν_out = g²ν_in + (g²−1)ν_env and
    ``mu_coherent_expansion`` is 2(1 − 1/g²)(1 + Ẽ) + 1/g². Fock columns are
    NaN with ``status`` set when the state does not fit the two-mode cap.
    """

    gain_sq: float
    E: float
    e_tilde: float
    mu_coherent: float
    mu_coherent_moments: float
    mu_coherent_expansion: float
    mu_omega: float
    mu_omega_moments: float
    n_trunc: int
    status: str = "ok"


def reduced_purity(state: Union[DensityOperator, FockVector], keep: int = 0) -> float:
    """tr(ρ_keep²) of a two-mode state."""
    if isinstance(state, FockVector):
        reduced = reduced_from_vector(state.amplitudes, state.n_trunc, keep)
    else:
        reduced = partial_trace(state, keep).matrix
    return float(np.real(np.sum(reduced * reduced.T)))


def renyi2(state: Union[DensityOperator, FockVector], keep: int = 0) -> float:
    """S₂ = −log₂ tr(ρ_keep²) in bits.

    Raises:
        ValidityError: If the reduced purity is outside (0, 1 + 1e-9]
    """
    purity = reduced_purity(state, keep)
    if not 0.0 < purity <= 1.0 + _PURITY_SLACK:
        raise ValidityError(f"reduced purity {purity:.12f} outside (0, 1]")
    return max(0.0, -math.log2(min(purity, 1.0)))


def von_neumann(state: Union[DensityOperator, FockVector], keep: int = 0) -> float:
    """−tr ρ log₂ ρ of the reduced state of a two-mode state, or of a single-mode state."""
    if isinstance(state, FockVector):
        reduced = reduced_from_vector(state.amplitudes, state.n_trunc, keep)
    elif state.mode_count == 2:
        reduced = partial_trace(state, keep).matrix
    else:
        reduced = state.matrix
    eigenvalues = np.linalg.eigvalsh(0.5 * (reduced + reduced.conj().T))
    eigenvalues = eigenvalues[eigenvalues > 1e-16]
    return float(-np.sum(eigenvalues * np.log2(eigenvalues)))


def gaussian_purity(cov: np.ndarray) -> float:
    """tr ρ² = 1/(2√det V) for a single-mode Gaussian with covariance V."""
    return float(1.0 / (2.0 * math.sqrt(np.linalg.det(np.asarray(cov, dtype=float)))))


def beamsplitter_output(vector: FockVector, zeta: complex = math.pi / 4) -> FockVector:
    """U_BS(ζ) applied to a two-mode vector; exact on the truncated space."""
    blocks = two_mode_blocks(Beamsplitter(zeta=zeta), vector.n_trunc)
    return FockVector(amplitudes=apply_blocks(blocks, vector.amplitudes), n_trunc=vector.n_trunc, mode_count=2)


def omega_beamsplitter_purity(gamma: float, w: float, branch: str = "+") -> float:
    """Reduced purity after a 50:50 beamsplitter for |0⟩ ⊗ S(w)(|γ⟩ ± |−γ⟩).

    With t = e^{2w}/(1 + e^{2w}) and ε = e^{−2γ²}:
    tr ρ² = [½(1 + ε²) + ε^{2(1−t)} ± 2e^{−γ²(3−2t)}] / (cosh w (1 ± ε)²)
    """
    sign = 1.0 if branch == "+" else -1.0
    t = 1.0 / (1.0 + math.exp(-2.0 * w))
    g2 = gamma * gamma
    numerator = (0.5 * (1.0 + math.exp(-4.0 * g2)) + math.exp(-4.0 * g2 * (1.0 - t))
                 + 2.0 * sign * math.exp(-g2 * (3.0 - 2.0 * t)))
    return numerator / (math.cosh(w) * (1.0 + sign * math.exp(-2.0 * g2)) ** 2)


def entropy_row(E: float, omega: Optional[OmegaSettings] = None) -> EntropyRow:
    """S₂ after a 50:50 beamsplitter for (i) |0⟩⊗Ω₊, (ii) |0⟩⊗squeezed vacuum,
    (iii) two squeezed vacua that the beamsplitter turns into a two-mode
    squeezed vacuum, all at total energy Ẽ = ⟨a†a⟩_{Ω₊}.

    Ω₊ is the superposition of the energy-E distant pair itself
    (``ENTROPY_OMEGA``) unless ``omega`` says otherwise.
    """
    state = build_omega(E, omega=omega or ENTROPY_OMEGA)
    e_tilde = state.e_tilde
    joint = FockVector.basis(0, state.n_trunc).tensor(state.fock)
    s2_omega = renyi2(beamsplitter_output(joint))
    s2_closed = -math.log2(min(1.0, omega_beamsplitter_purity(state.gamma, state.w, state.branch)))

    squeeze = math.asinh(math.sqrt(e_tilde))
    vacuum = 0.5 * np.eye(2)
    reduced = 0.5 * (vacuum + GaussianPure(w=squeeze).covariance())
    s2_squeezed = -math.log2(min(1.0, gaussian_purity(reduced)))
    # each mode of the two-mode squeezed vacuum is thermal with n̄ = Ẽ/2
    s2_two_mode = -math.log2(gaussian_purity((e_tilde / 2.0 + 0.5) * np.eye(2)))

    logger.debug(f"entropy E={E}: e_tilde={e_tilde:.6f} S2 omega={s2_omega:.6f} sq={s2_squeezed:.6f} tms={s2_two_mode:.6f}")
    return EntropyRow(E=float(E), e_tilde=e_tilde, s2_omega=s2_omega, s2_squeezed=s2_squeezed,
                      s2_two_mode=s2_two_mode, n_trunc=state.n_trunc, tail_mass=state.tail_mass,
                      s2_omega_closed_form=s2_closed)


def entropy_sweep(e_grid: Sequence[float], omega: Optional[OmegaSettings] = None) -> List[EntropyRow]:
    return [entropy_row(E, omega) for E in e_grid]


def entropy_crossings(rows: Sequence[EntropyRow]) -> List[Tuple[float, float]]:
    """Adjacent grid energies between which S₂(Ω₊) − S₂(two-mode squeezed) changes sign."""
    differences = [r.s2_omega - r.s2_two_mode for r in rows]
    return [(rows[i].E, rows[i + 1].E) for i in range(len(rows) - 1)
            if np.sign(differences[i]) != np.sign(differences[i + 1])]


def mean_noise(rho: DensityOperator) -> float:
    """ν(ρ) = (1/π)∫₀^π Var(x^{(θ)}) dθ = ⟨a†a⟩ + ½ − |⟨a⟩|²."""
    a, _, number = ladder_matrices(rho.n_trunc)
    mean_a = rho.expectation(a)
    return float(rho.expectation(number).real + 0.5 - abs(mean_a) ** 2)


def mean_noise_by_quadrature(rho: DensityOperator, tolerance: float = 1e-12) -> float:
    """ν(ρ) by numerical θ-integration of Var(e^{iθn} q e^{−iθn})."""
    padded = rho.resized(rho.n_trunc + 2)
    q, _ = quadratures(padded.n_trunc)
    levels = np.arange(padded.n_trunc)

    def variance(theta: float) -> float:
        phases = np.exp(1j * theta * levels)
        rotated = phases[:, None] * q * phases.conj()[None, :]
        first = padded.expectation(rotated).real
        second = padded.expectation(rotated @ rotated).real
        return second - first * first

    value, _ = quad(variance, 0.0, math.pi, epsabs=tolerance, epsrel=tolerance, limit=200)
    return float(value / math.pi)


def amplifier_output_noise(r: float, nu_in: float, nu_env: float) -> float:
    """ν(Ξ_r(ρ)) = g²ν(ρ) + (g² − 1)ν(env) for a product input."""
    gain_sq = math.cosh(r) ** 2
    return gain_sq * nu_in + (gain_sq - 1.0) * nu_env


def amplifier_noise_report(spec: Amplifier, rho: DensityOperator, backend: str = "auto") -> NoiseReport:
    """Apply Ξ_r and compare ν before and after."""
    output = apply_channel(spec, rho, backend)
    nu_in, nu_out = mean_noise(rho), mean_noise(output)
    mu = nu_out / (spec.gain_sq * nu_in)
    if mu < 1.0 / spec.gain_sq - 1e-9:
        logger.warning(f"mu={mu:.6e} below the floor 1/g^2={1.0 / spec.gain_sq:.6e}")
    return NoiseReport(nu_in=nu_in, nu_out=nu_out, gain_sq=spec.gain_sq, mu=mu,
                       n_trunc=output.n_trunc, backend=str(output.metadata.get("backend", "")))


def _environment_noise(env: Environment, n_trunc: int) -> float:
    return mean_noise(env.fock(n_trunc).to_density())


def noise_expansion_sweep(
    gains_sq: Sequence[float],
    energies: Sequence[float],
    backend: str = "auto",
) -> List[NoiseExpansionRow]:
    """μ for coherent (vacuum) and Ω₊ inputs of Ξ_r with an Ω₊(E) environment.

    Coherent-input noise grows with the environment energy while the Ω₊
    input saturates at 2 − 1/g².
    """
    rows = []
    for gain_sq in gains_sq:
        r = math.acosh(math.sqrt(gain_sq))
        for E in energies:
            env = OmegaEnv(E)
            state = env.state()
            nu_env = _environment_noise(env, state.n_trunc)
            vacuum = FockVector.basis(0, state.n_trunc).to_density()
            omega_in = state.density()
            nu_omega = mean_noise(omega_in)

            mu_coherent_moments = amplifier_output_noise(r, 0.5, nu_env) / (gain_sq * 0.5)
            mu_omega_moments = amplifier_output_noise(r, nu_omega, nu_env) / (gain_sq * nu_omega)
            expansion = 2.0 * (1.0 - 1.0 / gain_sq) * (1.0 + state.e_tilde) + 1.0 / gain_sq

            spec = Amplifier(r, env)
            try:
                coherent = amplifier_noise_report(spec, vacuum, backend)
                omega = amplifier_noise_report(spec, omega_in, backend)
                mu_coherent, mu_omega, n_trunc, status = coherent.mu, omega.mu, max(coherent.n_trunc, omega.n_trunc), "ok"
            except TruncationRiskError as e:
                logger.info(f"noise sweep g2={gain_sq} E={E}: Fock columns skipped ({e})")
                mu_coherent, mu_omega, n_trunc, status = math.nan, math.nan, 0, "truncation"

            rows.append(NoiseExpansionRow(
                gain_sq=float(gain_sq), E=float(E), e_tilde=state.e_tilde,
                mu_coherent=mu_coherent, mu_coherent_moments=mu_coherent_moments,
                mu_coherent_expansion=expansion, mu_omega=mu_omega, mu_omega_moments=mu_omega_moments,
                n_trunc=n_trunc, status=status,
            ))
    return rows

