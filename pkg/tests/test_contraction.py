"""Tests for trace distances, Husimi functions and contraction bounds."""

import math

import numpy as np
import pytest

from cv_channels.analysis.contraction import (
    data_processing_gap,
    diameter_pair,
    husimi_q,
    q_normalization,
    random_density,
    tau_lower_bound,
    trace_distance,
    z2_image_defect,
)
from cv_channels.channels.spec import Attenuator, GaussianEnv, OmegaEnv, VacuumEnv
from cv_channels.exceptions import DomainError, ValidityError
from cv_channels.fock import DensityOperator, FockVector, coherent_amplitudes
from cv_channels.states import max_distant_pair


def coherent_density(alpha, n_trunc=40):
    return FockVector.from_amplitudes(coherent_amplitudes(alpha, n_trunc)).to_density()


class TestTraceDistance:
    """Test the trace norm of state differences."""

    def test_coherent_pair(self):
        """Test ‖|α⟩⟨α| − |−α⟩⟨−α|‖₁ = 2√(1 − e^{−4|α|²})."""
        distance = trace_distance(coherent_density(1.0), coherent_density(-1.0))
        assert distance == pytest.approx(2.0 * math.sqrt(1.0 - math.exp(-4.0)), abs=1e-10)

    def test_orthogonal_states(self):
        """Test orthogonal states are at the maximal distance 2."""
        assert trace_distance(FockVector.basis(0, 3).to_density(), FockVector.basis(2, 3).to_density()) == pytest.approx(2.0)

    def test_pads_truncations(self):
        """Test states of different truncation are compared on a common block."""
        small = FockVector.basis(1, 3).to_density()
        assert trace_distance(small, small.resized(8)) == pytest.approx(0.0, abs=1e-14)

    def test_rejects_non_hermitian(self):
        """Test a non-Hermitian difference is refused."""
        matrix = np.array([[1.0, 0.5], [0.0, 0.0]])
        with pytest.raises(ValidityError, match="not Hermitian"):
            trace_distance(DensityOperator(matrix=matrix, n_trunc=2), FockVector.basis(0, 2).to_density())


class TestHusimi:
    """Test the Husimi function and plane quadrature."""

    def test_vacuum(self):
        """Test Q_vac(α) = e^{−|α|²}."""
        vacuum = FockVector.basis(0, 10).to_density()
        alphas = np.array([0.0, 1.0, 0.5 + 0.5j])
        assert np.allclose(husimi_q(vacuum, alphas), np.exp(-np.abs(alphas) ** 2))
        assert isinstance(husimi_q(vacuum, 0.3), float)

    def test_normalization(self):
        """Test ∫(d²α/π) Q = 1."""
        rho = coherent_density(0.8 - 0.3j)
        assert q_normalization(rho) == pytest.approx(1.0, abs=1e-6)


class TestDiameter:
    """Test the maximally distant pair used as the hull diameter."""

    def test_pair_is_parity_image(self):
        """Test ρ₂ = Pρ₁P."""
        rho1, rho2 = diameter_pair(1.0)
        assert np.allclose(rho1.parity_conjugated().matrix, rho2.matrix)

    def test_distance_matches_overlap(self):
        """Test the diameter equals 2√(1 − e^{−4γ_c²})."""
        rho1, rho2 = diameter_pair(0.5)
        expected = 2.0 * math.sqrt(1.0 - max_distant_pair(0.5).overlap() ** 2)
        assert trace_distance(rho1, rho2) == pytest.approx(expected, abs=1e-8)

    def test_zero_energy_collapses(self):
        """Test both members are the vacuum at E = 0."""
        rho1, rho2 = diameter_pair(0.0)
        assert trace_distance(rho1, rho2) == pytest.approx(0.0, abs=1e-14)


class TestTauLowerBound:
    """Test the heterodyne lower bound on the contraction coefficient."""

    def test_zero_energy(self):
        """Test E = 0 has no diameter to contract."""
        with pytest.raises(DomainError, match="degenerate"):
            tau_lower_bound(0.0, Attenuator(math.pi / 4, OmegaEnv(0.5)))

    def test_requires_covariance(self):
        """Test a displaced environment breaks parity covariance."""
        with pytest.raises(DomainError, match="Z2-covariant"):
            tau_lower_bound(0.5, Attenuator(math.pi / 4, GaussianEnv(alpha=0.5)))

    @pytest.mark.slow
    def test_identity_channel(self):
        """Test ζ = 0 keeps the bound below one and the output distance at the diameter."""
        report = tau_lower_bound(0.5, Attenuator(0.0, OmegaEnv(0.5)))
        assert report.output_distance == pytest.approx(report.diameter_distance, abs=1e-8)
        assert 0.0 < report.tau_lower <= 1.0 + 1e-6

    @pytest.mark.slow
    def test_swap_channel(self):
        """Test ζ = π/2 outputs the parity-symmetric environment."""
        report = tau_lower_bound(0.5, Attenuator(math.pi / 2, OmegaEnv(0.5)))
        assert report.tau_lower < 1e-6
        assert report.output_distance < 1e-8

    @pytest.mark.slow
    def test_bound_below_output_distance(self):
        """Test the Q-function distance never exceeds the trace distance."""
        report = tau_lower_bound(0.5, Attenuator(math.pi / 4, OmegaEnv(0.5)))
        assert report.q_integral <= report.output_distance + 1e-5
        assert report.quadrature_level >= 0


class TestDataProcessing:
    """Test channels never increase trace distance."""

    def test_random_density_is_valid(self):
        """Test the Ginibre construction gives unit-trace positive states."""
        rho = random_density(5, np.random.default_rng(7), rank=2)
        rho.validate()
        assert np.sum(rho.eigenvalues() > 1e-12) == 2

    @pytest.mark.parametrize("spec", [
        Attenuator(math.pi / 4, VacuumEnv()),
        Attenuator(math.pi / 6, OmegaEnv(0.5)),
    ])
    def test_contractive(self, spec):
        """Test ‖Ξ(ρ) − Ξ(σ)‖₁ ≤ ‖ρ − σ‖₁ on random pairs."""
        rng = np.random.default_rng(20240611)
        for _ in range(5):
            assert data_processing_gap(spec, random_density(5, rng), random_density(5, rng)) <= 1e-6

    def test_parity_image(self):
        """Test covariant channels map the parity partner to the parity image."""
        assert z2_image_defect(0.5, Attenuator(math.pi / 4, OmegaEnv(0.5))) < 1e-8
