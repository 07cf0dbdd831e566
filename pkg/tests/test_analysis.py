"""Tests for nonclassicality diagnostics and correlation measures."""

import math
from unittest.mock import patch

import numpy as np
import pytest

from cv_channels.analysis.correlations import (
    EntropyRow,
    amplifier_noise_report,
    amplifier_output_noise,
    beamsplitter_output,
    entropy_crossings,
    entropy_row,
    entropy_sweep,
    gaussian_purity,
    mean_noise,
    mean_noise_by_quadrature,
    noise_expansion_sweep,
    omega_beamsplitter_purity,
    reduced_purity,
    renyi2,
    von_neumann,
)
from cv_channels.analysis.nonclassicality import (
    DeltaBounds,
    MixedDeltaBound,
    attenuated_gaussian_covariance,
    classicality_test,
    critical_noise,
    delta_bounds_pure,
    even_cat_attenuation_distance,
    even_cat_distance_maximum,
    gaussian_is_classical,
    noise_threshold_verdicts,
    line_witness,
)
from cv_channels.channels.charfn_backend import char_fn_output
from cv_channels.channels.spec import Amplifier, ClassicalNoise, Composition, OmegaEnv, VacuumEnv
from cv_channels.config.settings import GridSettings, OmegaSettings
from cv_channels.exceptions import DomainError
from cv_channels.fock import DensityOperator, FockVector, coherent_amplitudes
from cv_channels.states import GaussianPure, to_fock
from cv_channels.states.superposition import build_omega


class TestEnvelopeTest:
    """Test the grid classicality test."""

    def test_coherent_state_is_classical(self):
        """Test |χ| of a coherent state never exceeds the vacuum envelope."""
        verdict = classicality_test(GaussianPure(alpha=1.0 + 0.5j).char_fn())
        assert verdict.classical_on_grid
        assert verdict.witness is None

    def test_squeezed_vacuum_has_witness(self):
        """Test squeezing violates the envelope along the anti-squeezed direction."""
        verdict = classicality_test(GaussianPure(w=0.5).char_fn())
        assert not verdict.classical_on_grid
        assert verdict.witness.margin > 0
        assert abs(verdict.witness.x) > abs(verdict.witness.y)

    @pytest.mark.slow
    def test_density_input(self):
        """Test a Fock density is evaluated through its matrix elements."""
        grid = GridSettings(half_width=5.0, points=201, cover_revival=False)
        verdict = classicality_test(FockVector.basis(1, 6).to_density(), grid)
        assert not verdict.classical_on_grid

    def test_gaussian_criterion(self):
        """Test V ≥ I/2 separates classical Gaussians."""
        assert gaussian_is_classical(0.5 * np.eye(2))
        assert gaussian_is_classical(2.0 * np.eye(2))
        assert not gaussian_is_classical(GaussianPure(w=0.3).covariance())

    def test_attenuated_covariance(self):
        """Test mixing two vacua leaves the vacuum covariance."""
        cov = attenuated_gaussian_covariance(math.pi / 4, 0.5 * np.eye(2), 0.5 * np.eye(2))
        assert np.allclose(cov, 0.5 * np.eye(2))

    @pytest.mark.parametrize("spec", [Amplifier(0.4), Composition((ClassicalNoise(0.2), Amplifier(0.4)))])
    def test_amplifier_preserves_classicality(self, spec):
        """Test a vacuum-environment amplifier keeps classical inputs inside the envelope."""
        output = char_fn_output(spec, GaussianPure(alpha=0.8 - 0.3j).char_fn())
        verdict = classicality_test(output)
        assert verdict.classical_on_grid
        assert verdict.witness is None


class TestThresholds:
    """Test closed-form thresholds and the line witness."""

    def test_even_cat_maximum(self):
        """Test the even-cat bound peaks at 0.3003 where α² = ½ asinh 2."""
        alpha, value = even_cat_distance_maximum()
        assert value == pytest.approx(0.3003, abs=1e-4)
        assert alpha == pytest.approx(math.sqrt(0.5 * math.asinh(2.0)), abs=1e-4)

    def test_even_cat_domain(self):
        """Test negative amplitudes are rejected."""
        with pytest.raises(DomainError, match="nonnegative"):
            even_cat_attenuation_distance(-1.0)

    def test_critical_noise(self):
        """Test N_crit = ½ − 1/(2(2E + 1))."""
        assert critical_noise(1.0) == pytest.approx(1.0 / 3.0)
        assert critical_noise(0.0) == pytest.approx(0.0)

    @pytest.mark.slow
    def test_verdicts_straddle_critical_noise(self):
        """Test a witness below N_crit and none above it."""
        n_crit, below, above = noise_threshold_verdicts(1.0)
        assert n_crit == pytest.approx(1.0 / 3.0)
        assert not below.classical_on_grid
        assert above.classical_on_grid

    def test_line_witness_independent_of_displacement(self):
        """Test the input displacement changes only the phase of χ on the line."""
        vacuum = line_witness(1.0)
        displaced = line_witness(1.0, alpha=2 + 1j)
        assert vacuum.margin > 1e-7
        assert displaced.margin == pytest.approx(vacuum.margin, abs=1e-9)

    @pytest.mark.slow
    @pytest.mark.parametrize("E, predicted", [(5.0, 1.9330), (10.0, 2.7146)])
    def test_line_witness_location_tracks_asymptotic_form(self, E, predicted):
        """Test the located violation sits where the large-E output form puts it."""
        witness = line_witness(E)
        assert witness.predicted_x == pytest.approx(predicted, abs=1e-3)
        assert abs(witness.x - witness.predicted_x) < 0.02

    def test_line_witness_uses_isoenergetic_cat(self):
        """Test the witness environment is the isoenergetic cat unless overridden."""
        with patch("cv_channels.analysis.nonclassicality.OmegaEnv", wraps=OmegaEnv) as env:
            line_witness(1.0, points=201)
        assert env.call_args.kwargs["cat_amplitude"] == "isoenergetic"

    def test_line_witness_domain(self):
        """Test E = 0 has no witness to search for."""
        with pytest.raises(DomainError, match="E > 0"):
            line_witness(0.0)


class TestDeltaBounds:
    """Test bounds on the nonclassicality distance."""

    def test_bounds_must_be_ordered(self):
        """Test an inverted bracket is rejected."""
        with pytest.raises(ValueError, match="inconsistent"):
            DeltaBounds(lower=1.0, upper=0.5, sup_overlap=0.5, beta=0j)

    def test_coherent_state_has_zero_distance(self):
        """Test a coherent state attains overlap one."""
        psi = FockVector.from_amplitudes(coherent_amplitudes(0.7 - 0.2j, 30))
        bounds = delta_bounds_pure(psi)
        assert bounds.sup_overlap == pytest.approx(1.0, abs=1e-9)
        assert bounds.upper < 1e-3

    def test_single_photon(self):
        """Test sup |⟨β|1⟩|² = 1/e."""
        bounds = delta_bounds_pure(FockVector.basis(1, 20))
        assert bounds.sup_overlap == pytest.approx(math.exp(-1.0), abs=1e-8)
        assert bounds.lower == pytest.approx(2.0 * (1.0 - math.exp(-1.0)), abs=1e-7)
        assert bounds.upper == pytest.approx(2.0 * math.sqrt(1.0 - math.exp(-1.0)), abs=1e-7)

    def test_requires_normalized_state(self):
        """Test an unnormalized vector is rejected."""
        psi = FockVector.from_amplitudes(np.array([1.0, 1.0, 0.0]), normalize=False)
        with pytest.raises(DomainError, match="normalized"):
            delta_bounds_pure(psi)

    def test_mixed_bound_takes_cap(self):
        """Test the reported bound is the smaller of the two."""
        assert MixedDeltaBound(upper=0.8, sup_q=0.84, beta=0j, omega_cap=0.5).best == 0.5
        assert MixedDeltaBound(upper=0.8, sup_q=0.84, beta=0j).best == 0.8

    @pytest.mark.slow
    def test_cat_lower_bound_grows_with_energy(self):
        """Test the δ lower bound of Ω₊(E) is nondecreasing over the energy grid."""
        lowers = [delta_bounds_pure(build_omega(E).fock).lower for E in (0.1, 0.5, 1.0, 2.0, 5.0)]
        assert lowers[0] > 0
        assert all(later >= earlier - 1e-6 for earlier, later in zip(lowers, lowers[1:]))


class TestEntanglement:
    """Test entropies of beamsplitter outputs."""

    def test_hong_ou_mandel_entropy(self):
        """Test |1,1⟩ through a 50:50 beamsplitter carries one bit of Rényi-2 entropy."""
        output = beamsplitter_output(FockVector.basis(1, 3, 1))
        assert renyi2(output) == pytest.approx(1.0, abs=1e-12)
        assert von_neumann(output) == pytest.approx(1.0, abs=1e-12)

    def test_product_state(self):
        """Test a product state has unit reduced purity."""
        joint = FockVector.basis(0, 4).tensor(FockVector.basis(2, 4))
        assert reduced_purity(joint) == pytest.approx(1.0)
        assert renyi2(joint) == pytest.approx(0.0)

    def test_vector_and_density_agree(self):
        """Test the pure-state shortcut gives the same purity."""
        joint = FockVector.basis(0, 5).tensor(FockVector.from_amplitudes(coherent_amplitudes(0.5, 5)))
        output = beamsplitter_output(joint, zeta=0.3)
        assert reduced_purity(output, 1) == pytest.approx(reduced_purity(output.to_density(), 1))

    def test_gaussian_purity(self):
        """Test tr ρ² = 1/(2√det V)."""
        assert gaussian_purity(0.5 * np.eye(2)) == pytest.approx(1.0)
        assert gaussian_purity(1.5 * np.eye(2)) == pytest.approx(1.0 / 3.0)

    def test_vacuum_row(self):
        """Test every entropy vanishes at E = 0."""
        row = entropy_row(0.0)
        assert row.e_tilde == pytest.approx(0.0, abs=1e-12)
        assert row.s2_omega == pytest.approx(0.0, abs=1e-12)
        assert row.s2_squeezed == pytest.approx(0.0, abs=1e-12)
        assert row.s2_two_mode == pytest.approx(0.0, abs=1e-12)

    def test_omega_above_squeezed(self):
        """Test Ω₊ generates more entanglement than a squeezed vacuum of equal energy."""
        row = entropy_row(0.5)
        assert row.s2_omega > row.s2_squeezed > 0

    def test_omega_above_squeezed_at_unit_energy(self):
        """Test the ordering and the tabulated values of the isoenergetic cat at E = 1."""
        row = entropy_row(1.0)
        assert row.e_tilde == pytest.approx(0.8801, abs=1e-3)
        assert row.s2_omega == pytest.approx(0.7040, abs=1e-3)
        assert row.s2_squeezed == pytest.approx(0.4553, abs=1e-3)
        assert row.s2_two_mode > row.s2_omega > row.s2_squeezed

    @pytest.mark.parametrize("E", [0.5, 1.0])
    def test_fock_entropy_matches_closed_form(self, E):
        """Test the truncated S₂ equals the closed-form reduced purity."""
        row = entropy_row(E)
        assert row.s2_omega == pytest.approx(row.s2_omega_closed_form, abs=1e-7)

    def test_fock_table_cat_entangles_less(self):
        """Test the r_c-amplitude cat falls below the squeezed vacuum at E = 1."""
        row = entropy_row(1.0, OmegaSettings(cat_amplitude="fock_table"))
        assert row.s2_omega == pytest.approx(0.0475, abs=1e-3)
        assert row.s2_omega < row.s2_squeezed

    def test_closed_form_purity_of_vacuum(self):
        """Test the closed form is 1 for γ = 0 and w = 0."""
        assert omega_beamsplitter_purity(0.0, 0.0) == pytest.approx(1.0)

    def test_closed_form_odd_branch(self):
        """Test an unsqueezed odd cat splits into two equally weighted cats of purity ½."""
        assert omega_beamsplitter_purity(0.7, 0.0, branch="-") == pytest.approx(0.5, abs=1e-12)

    def test_no_two_mode_crossing_on_grid(self):
        """Test S₂ of the cat stays below the two-mode squeezed vacuum from E = 0.5 to 2."""
        rows = entropy_sweep([0.5, 0.7, 1.0, 2.0])
        assert entropy_crossings(rows) == []
        assert all(r.s2_omega < r.s2_two_mode for r in rows)

    def test_crossings_bracket_sign_changes(self):
        """Test a sign change of S₂(Ω₊) − S₂(two-mode) is reported between its grid points."""
        rows = [
            EntropyRow(E=E, e_tilde=0.0, s2_omega=omega, s2_squeezed=0.0, s2_two_mode=1.0, n_trunc=8, tail_mass=0.0)
            for E, omega in [(0.5, 0.8), (0.6, 0.9), (0.7, 1.1), (0.8, 1.2)]
        ]
        assert entropy_crossings(rows) == [(0.6, 0.7)]


class TestMeanNoise:
    """Test mean second-moment noise."""

    def test_coherent_state(self):
        """Test ν = ½ for any coherent state."""
        rho = FockVector.from_amplitudes(coherent_amplitudes(1.0 + 0.5j, 40)).to_density()
        assert mean_noise(rho) == pytest.approx(0.5, abs=1e-9)

    def test_number_state(self):
        """Test ν(|1⟩) = 3/2."""
        assert mean_noise(FockVector.basis(1, 4).to_density()) == pytest.approx(1.5)

    def test_quadrature_integral_agrees(self):
        """Test the θ-integral of quadrature variances against the closed form."""
        rho = to_fock(GaussianPure(alpha=0.4, w=0.3), n_trunc=40).to_density()
        assert mean_noise_by_quadrature(rho) == pytest.approx(mean_noise(rho), abs=1e-8)

    def test_unit_gain_passes_noise(self):
        """Test g = 1 leaves ν unchanged."""
        assert amplifier_output_noise(0.0, 0.7, 3.0) == pytest.approx(0.7)

    def test_vacuum_environment(self):
        """Test μ = 2 − 1/g² for vacuum input and environment."""
        spec = Amplifier(0.3, VacuumEnv())
        report = amplifier_noise_report(spec, FockVector.basis(0, 30).to_density())
        assert report.mu == pytest.approx(2.0 - 1.0 / spec.gain_sq, abs=1e-8)
        assert report.mu >= 1.0 / spec.gain_sq

    @pytest.mark.slow
    def test_expansion_matches_moments(self):
        """Test the coherent-input expansion against moments and the Fock computation."""
        row = noise_expansion_sweep([2.0], [0.5])[0]
        assert row.status == "ok"
        assert row.mu_coherent_expansion == pytest.approx(row.mu_coherent_moments, rel=1e-12)
        assert row.mu_coherent == pytest.approx(row.mu_coherent_moments, abs=1e-6)
        assert row.mu_omega >= 0.5
