"""Table builders behind the CLI commands.

Each builder returns ``SweepRecord`` rows with convergence metadata; the
CLI only resolves parameters and writes the table.
"""

import math
from typing import List, Optional, Sequence

from tqdm import tqdm

from ..analysis.contraction import tau_lower_bound
from ..analysis.correlations import entropy_sweep, noise_expansion_sweep
from ..analysis.nonclassicality import (
    attenuated_noise_charfn,
    classicality_test,
    critical_noise,
    delta_bounds_pure,
    delta_upper_mixed,
)
from ..channels.operations import apply_channel
from ..channels.spec import Amplifier, Attenuator, ChannelSpec, OmegaEnv
from ..config.settings import settings
from ..fock.states import FockVector
from ..states.superposition import build_omega
from ..utils.logging import get_logger
from .records import SweepRecord

logger = get_logger(__name__)

DEFAULT_GRIDS = {
    "fig1": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.25, 1.5, 2.0],
    "fig2": [0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0],
    "fig3": [0.5, 1.0, 5.0, 10.0],
    "threshold": [0.5, 1.0, 5.0],
    "contraction": [0.5, 1.0],
    "noise": [0.5, 1.0, 2.0],
}

DEFAULT_ZETAS = [0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8, math.pi / 2]
DEFAULT_GAINS_SQ = [1.5, 2.0, 4.0]


def _progress(items: Sequence, desc: str, show: bool):
    return tqdm(items, desc=desc, unit="pt", disable=not show, leave=False)


def entropy_records(e_grid: Sequence[float], show_progress: bool = False) -> List[SweepRecord]:
    """Rényi-2 entropies of the three beamsplitter inputs per energy."""
    records = []
    for E in _progress(e_grid, "fig1", show_progress):
        row = entropy_sweep([E])[0]
        records.append(SweepRecord(
            params={"E": row.E},
            observables={"e_tilde": row.e_tilde, "s2_omega": row.s2_omega,
                         "s2_omega_closed_form": row.s2_omega_closed_form,
                         "s2_squeezed_vacuum": row.s2_squeezed, "s2_two_mode_squeezed": row.s2_two_mode},
            metadata={"n_trunc": row.n_trunc, "tail_mass": row.tail_mass},
        ))
    return records


def delta_bound_records(e_grid: Sequence[float], show_progress: bool = False) -> List[SweepRecord]:
    """Bounds on δ for Ω₊(E) and for Ξ_{π/4}(|0⟩⟨0|) with an Ω₊(E) environment."""
    records = []
    for E in _progress(e_grid, "fig2", show_progress):
        state = build_omega(E)
        pure = delta_bounds_pure(state.fock)
        vacuum = FockVector.basis(0, state.n_trunc).to_density()
        output = apply_channel(Attenuator(math.pi / 4, OmegaEnv(E)), vacuum)
        mixed = delta_upper_mixed(output, omega_E=E)
        records.append(SweepRecord(
            params={"E": float(E)},
            observables={
                "delta_lower_omega": pure.lower,
                "delta_upper_omega": pure.upper,
                "delta_upper_channel_output": mixed.best,
                "sup_overlap_omega": pure.sup_overlap,
                "sup_beta_omega": abs(pure.beta),
                "sup_q_channel_output": mixed.sup_q,
                "sup_beta_channel_output": abs(mixed.beta),
            },
            metadata={"n_trunc": output.n_trunc, "tail_mass": state.tail_mass,
                      "flagged": pure.flagged or mixed.flagged},
        ))
    return records


def photon_number_records(e_grid: Sequence[float], n_trunc: Optional[int] = None) -> List[SweepRecord]:
    """Photon-number distribution of Ω₊(E), one row per (E, n) with n below the truncation."""
    records = []
    for E in e_grid:
        state = build_omega(E, n_trunc=n_trunc)
        probabilities = state.probabilities()
        for n in range(len(probabilities)):
            records.append(SweepRecord(
                params={"E": float(E), "n": n},
                observables={"probability": float(probabilities[n])},
                metadata={"n_trunc": state.n_trunc, "tail_mass": state.tail_mass},
            ))
    return records


def threshold_records(
    e_grid: Sequence[float],
    noise: Optional[float] = None,
    offset: float = 0.05,
    show_progress: bool = False,
) -> List[SweepRecord]:
    """Classicality verdicts of Ξ_{π/4}∘Φ_N(|0⟩⟨0|) around N_crit, or at one given N."""
    records = []
    for E in _progress(e_grid, "threshold", show_progress):
        n_crit = critical_noise(E)
        levels = [noise] if noise is not None else [max(0.0, n_crit - offset), n_crit + offset]
        for N in levels:
            verdict = classicality_test(attenuated_noise_charfn(E, N))
            witness = verdict.witness
            records.append(SweepRecord(
                params={"E": float(E), "N": float(N)},
                observables={
                    "N_crit": n_crit,
                    "classical_on_grid": verdict.classical_on_grid,
                    "witness_x": witness.x if witness else math.nan,
                    "witness_y": witness.y if witness else math.nan,
                    "witness_margin": witness.margin if witness else math.nan,
                    "witness_log_ratio": witness.log_ratio if witness else math.nan,
                },
                metadata={"half_width": verdict.half_width, "points": verdict.points,
                          "best_statistic": verdict.best_statistic,
                          "candidates_refined": verdict.candidates_refined},
            ))
    return records


def contraction_channel(E: float, zeta: Optional[float] = None, r: Optional[float] = None) -> ChannelSpec:
    """Ξ_ζ, or Ξ_r when r is given, with an Ω₊ environment at the same energy constraint."""
    if r is not None:
        return Amplifier(r, OmegaEnv(E))
    return Attenuator(math.pi / 4 if zeta is None else zeta, OmegaEnv(E))


def contraction_records(
    e_grid: Sequence[float],
    zetas: Sequence[float],
    r: Optional[float] = None,
    show_progress: bool = False,
) -> List[SweepRecord]:
    """Heterodyne lower bounds on τ over energies and attenuator angles."""
    points = [(E, None) for E in e_grid] if r is not None else [(E, z) for E in e_grid for z in zetas]
    records = []
    for E, zeta in _progress(points, "contraction", show_progress):
        spec = contraction_channel(E, zeta, r)
        report = tau_lower_bound(E, spec)
        records.append(SweepRecord(
            params={"E": report.E, "channel": spec.kind,
                    "zeta": math.nan if zeta is None else float(zeta), "r": math.nan if r is None else float(r)},
            observables={"diameter_distance": report.diameter_distance, "q_integral": report.q_integral,
                         "tau_lower": report.tau_lower, "output_distance": report.output_distance},
            metadata={"n_trunc": report.n_trunc, "quadrature_refinements": report.quadrature_level,
                      "quadrature_change": report.quadrature_change, "radius": report.radius},
        ))
    return records


def noise_records(
    gains_sq: Sequence[float],
    energies: Sequence[float],
    show_progress: bool = False,
) -> List[SweepRecord]:
    """μ for coherent and Ω₊ inputs of Ξ_r with an Ω₊ environment."""
    records = []
    for gain_sq in _progress(gains_sq, "noise", show_progress):
        for row in noise_expansion_sweep([gain_sq], energies):
            records.append(SweepRecord(
                params={"gain_sq": row.gain_sq, "r": math.acosh(math.sqrt(row.gain_sq)), "E": row.E},
                observables={
                    "e_tilde": row.e_tilde,
                    "mu_coherent": row.mu_coherent,
                    "mu_coherent_moments": row.mu_coherent_moments,
                    "mu_coherent_expansion": row.mu_coherent_expansion,
                    "mu_omega": row.mu_omega,
                    "mu_omega_moments": row.mu_omega_moments,
                    "mu_floor": 1.0 / row.gain_sq,
                },
                metadata={"n_trunc": row.n_trunc, "status": row.status},
            ))
    return records


def resolve_e_grid(command: str, e_grid: Optional[Sequence[float]] = None) -> List[float]:
    """CLI value, then the config file's ``e_grid``, then the command default."""
    if e_grid:
        return [float(e) for e in e_grid]
    if settings.run.e_grid:
        return list(settings.run.e_grid)
    return list(DEFAULT_GRIDS[command])
