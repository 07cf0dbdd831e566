"""Tests for channel specifications, backends and dispatch."""

import math
from unittest.mock import patch

import numpy as np
import pytest

from cv_channels.analysis.contraction import trace_distance
from cv_channels.channels import (
    Amplifier,
    Attenuator,
    BackendRegistry,
    CharFnBackend,
    ClassicalNoise,
    Composition,
    GaussianEnv,
    KrausBackend,
    OmegaEnv,
    StinespringBackend,
    VacuumEnv,
    alternative_dilation_output,
    apply_channel,
    create_backend,
    create_best_backend,
    kraus_decomposition,
    completeness_defect,
    list_available_backends,
    symplectic_matrix,
    z2_covariance_check,
)
from cv_channels.channels.base import ChannelBackend
from cv_channels.channels.spec import Environment
from cv_channels.channels.stinespring import LEAK_LIMIT, Dilation, build_dilation, dilate
from cv_channels.config.settings import Settings, TruncationSettings, settings
from cv_channels.exceptions import BackendError, DomainError, TruncationRiskError
from cv_channels.fock.states import DensityOperator, FockVector
from cv_channels.states.gaussian import GaussianPure, to_fock


class MockBackend(ChannelBackend):
    """Mock backend for testing."""

    supported_variants = ("attenuator",)

    @property
    def name(self) -> str:
        return "mock"

    def apply(self, spec, rho):
        return rho.with_metadata(backend=self.name)

    @staticmethod
    def is_available() -> bool:
        return True


class UnavailableBackend(ChannelBackend):
    """Mock backend that's not available."""

    priority = 1
    supported_variants = ("attenuator", "amplifier")

    @property
    def name(self) -> str:
        return "unavailable"

    def apply(self, spec, rho):
        raise AssertionError("unavailable backends are never applied")

    @staticmethod
    def is_available() -> bool:
        return False


def thermal_populations(nbar: float, n: int) -> np.ndarray:
    k = np.arange(n)
    return nbar ** k / (nbar + 1.0) ** (k + 1)


class TestBackendRegistry:
    """Test backend registry functionality."""

    def setup_method(self):
        """Set up test environment."""
        self._saved = dict(BackendRegistry._backends)
        BackendRegistry._backends.clear()
        BackendRegistry._availability_cache.clear()

    def teardown_method(self):
        """Restore the registered backends."""
        BackendRegistry._backends.clear()
        BackendRegistry._backends.update(self._saved)
        BackendRegistry.clear_cache()

    def test_register_backend(self):
        """Test backend registration."""
        BackendRegistry.register('test', MockBackend)
        assert BackendRegistry.get_backend('test') == MockBackend

    def test_register_overwrite(self):
        """Test overwriting existing backend."""
        BackendRegistry.register('test', MockBackend)
        BackendRegistry.register('test', MockBackend)
        assert BackendRegistry.list_backends() == ['test']

    def test_get_backend_nonexistent(self):
        """Test getting non-existent backend."""
        assert BackendRegistry.get_backend('nonexistent') is None

    def test_is_backend_available(self):
        """Test backend availability checking."""
        BackendRegistry.register('mock', MockBackend)
        BackendRegistry.register('unavailable', UnavailableBackend)

        assert BackendRegistry.is_backend_available('mock') is True
        assert BackendRegistry.is_backend_available('unavailable') is False
        assert BackendRegistry.is_backend_available('nonexistent') is False

    def test_get_backend_priority(self):
        """Test backend priority retrieval."""
        BackendRegistry.register('mock', MockBackend)
        assert BackendRegistry.get_backend_priority('mock') == 100
        assert BackendRegistry.get_backend_priority('nonexistent') == 100

    def test_best_backend_skips_unavailable(self):
        """Test that a higher-priority but unavailable backend is not chosen."""
        BackendRegistry.register('mock', MockBackend)
        BackendRegistry.register('unavailable', UnavailableBackend)

        assert BackendRegistry.get_best_backend(Attenuator(0.3)) == 'mock'

    def test_best_backend_respects_channel_kind(self):
        """Test that the best backend must support the channel kind."""
        BackendRegistry.register('mock', MockBackend)
        assert BackendRegistry.get_best_backend(Amplifier(0.3)) is None

    def test_unregister_backend(self):
        """Test backend unregistration."""
        BackendRegistry.register('mock', MockBackend)
        BackendRegistry.unregister('mock')
        assert BackendRegistry.get_backend('mock') is None

    def test_get_backend_info(self):
        """Test getting backend information."""
        BackendRegistry.register('mock', MockBackend)

        info = BackendRegistry.get_backend_info()
        assert info['mock']['name'] == 'mock'
        assert info['mock']['available'] is True
        assert info['mock']['supported_variants'] == ['attenuator']

    def test_clear_cache(self):
        """Test clearing availability cache."""
        BackendRegistry.register('mock', MockBackend)
        BackendRegistry.is_backend_available('mock')
        assert len(BackendRegistry._availability_cache) > 0

        BackendRegistry.clear_cache()
        assert len(BackendRegistry._availability_cache) == 0

    def test_availability_error_is_cached_as_unavailable(self):
        """Test that an exception from is_available marks the backend unavailable."""
        BackendRegistry.register('mock', MockBackend)
        with patch.object(MockBackend, 'is_available', side_effect=RuntimeError("boom")):
            assert BackendRegistry.is_backend_available('mock') is False


class TestBackendFactory:
    """Test backend factory functions."""

    def setup_method(self):
        """Set up test environment."""
        self._saved = dict(BackendRegistry._backends)
        BackendRegistry._backends.clear()
        BackendRegistry.clear_cache()
        BackendRegistry.register('mock', MockBackend)

    def teardown_method(self):
        """Restore the registered backends."""
        BackendRegistry._backends.clear()
        BackendRegistry._backends.update(self._saved)
        BackendRegistry.clear_cache()

    def test_create_backend(self):
        """Test creating a backend instance with options."""
        backend = create_backend('mock', n_trunc=12, extra=3)
        assert isinstance(backend, MockBackend)
        assert backend.n_trunc == 12
        assert backend.options['extra'] == 3

    def test_create_backend_unknown(self):
        """Test creating unknown backend raises error."""
        with pytest.raises(BackendError, match="Unknown backend"):
            create_backend('unknown')

    def test_create_backend_unavailable(self):
        """Test creating unavailable backend raises error."""
        BackendRegistry.register('unavailable', UnavailableBackend)

        with pytest.raises(BackendError, match="not available"):
            create_backend('unavailable')

    def test_create_best_backend_none_available(self):
        """Test creating best backend when none supports the channel."""
        with pytest.raises(BackendError, match="No channel backend is available for amplifier"):
            create_best_backend(Amplifier(0.2))

    def test_list_available_backends(self):
        """Test listing available backends."""
        BackendRegistry.register('unavailable', UnavailableBackend)

        available = list_available_backends()
        assert 'mock' in available
        assert 'unavailable' not in available

    def test_backend_context_manager(self):
        """Test that backends close on context exit."""
        with patch.object(MockBackend, 'close') as close:
            with create_backend('mock'):
                pass
        close.assert_called_once()


class TestBackendIntegration:
    """Test that the built-in backends are registered."""

    def test_builtin_registration(self):
        """Test the three channel backends are available."""
        for name in ('stinespring', 'charfn', 'kraus'):
            assert BackendRegistry.is_backend_available(name)

    def test_registered_classes_are_exported(self):
        """Test the package registers the exported backend classes themselves."""
        assert BackendRegistry.get_backend('stinespring') is StinespringBackend
        assert BackendRegistry.get_backend('charfn') is CharFnBackend
        assert BackendRegistry.get_backend('kraus') is KrausBackend

    def test_priorities(self):
        """Test the dilation backend is preferred and noise goes to the characteristic-function backend."""
        assert BackendRegistry.get_best_backend(Attenuator(0.3)) == 'stinespring'
        assert BackendRegistry.get_best_backend(ClassicalNoise(0.1)) == 'charfn'


class TestChannelSpecs:
    """Test channel specification validation."""

    def test_attenuator_angle_range(self):
        """Test angles outside [0, pi/2] are rejected."""
        with pytest.raises(DomainError, match="attenuator angle"):
            Attenuator(2.0)

    def test_amplifier_needs_positive_squeezing(self):
        """Test r <= 0 is rejected."""
        with pytest.raises(DomainError, match="amplifier squeezing"):
            Amplifier(0.0)

    def test_negative_noise(self):
        """Test negative classical noise is rejected."""
        with pytest.raises(DomainError, match="nonnegative"):
            ClassicalNoise(-0.1)

    def test_gain(self):
        """Test g^2 = cosh^2 r."""
        assert Amplifier(0.5).gain_sq == pytest.approx(math.cosh(0.5) ** 2)

    def test_covariance_flags(self):
        """Test Z2 covariance follows the environment parity."""
        assert Attenuator(0.3, OmegaEnv(1.0)).is_z2_covariant()
        assert not Attenuator(0.3, GaussianEnv(alpha=0.5)).is_z2_covariant()
        assert Composition((ClassicalNoise(0.1), Amplifier(0.2, OmegaEnv(0.5)))).is_z2_covariant()

    def test_composition_flattens(self):
        """Test nested compositions flatten to their components."""
        inner = Composition((ClassicalNoise(0.1), Attenuator(0.2)))
        outer = Composition((inner, Amplifier(0.1)))
        assert [c.kind for c in outer.components()] == ["classical_noise", "attenuator", "amplifier"]

    def test_empty_composition(self):
        """Test an empty composition is rejected."""
        with pytest.raises(DomainError, match="at least one channel"):
            Composition(())

    def test_environment_is_abstract(self):
        """Test an environment must define its Fock, χ, energy and support forms."""
        with pytest.raises(TypeError, match="abstract"):
            Environment()


class TestApplyChannel:
    """Test channel action on density operators."""

    def test_vacuum_attenuator_on_coherent_state(self):
        """Test |α⟩ → |α cos ζ⟩ for a vacuum environment."""
        zeta = 0.6
        rho = to_fock(GaussianPure(alpha=1.0)).to_density()
        output = apply_channel(Attenuator(zeta), rho)
        expected = to_fock(GaussianPure(alpha=math.cos(zeta))).to_density()
        assert trace_distance(output, expected) < 1e-8

    def test_identity_angle(self):
        """Test ζ = 0 returns the input."""
        rho = to_fock(GaussianPure(alpha=0.4, w=0.2)).to_density()
        output = apply_channel(Attenuator(0.0, OmegaEnv(1.0)), rho)
        assert trace_distance(output, rho) < 1e-10

    def test_full_swap_returns_environment(self):
        """Test ζ = π/2 outputs the environment state."""
        env = OmegaEnv(0.5)
        rho = to_fock(GaussianPure(alpha=0.8)).to_density()
        output = apply_channel(Attenuator(math.pi / 2, env), rho)
        assert trace_distance(output, env.state().density()) < 1e-8

    def test_amplifier_on_vacuum_is_thermal(self):
        """Test Ξ_r(|0⟩⟨0|) with vacuum environment has n̄ = sinh² r."""
        r = 0.3
        output = apply_channel(Amplifier(r), FockVector.basis(0, 4).to_density())
        populations = np.real(output.populations())
        expected = thermal_populations(math.sinh(r) ** 2, populations.size)
        assert np.max(np.abs(populations - expected)) < 1e-8

    def test_classical_noise_on_vacuum_is_thermal(self):
        """Test Φ_N(|0⟩⟨0|) is thermal with n̄ = N."""
        output = apply_channel(ClassicalNoise(0.2), FockVector.basis(0, 4).to_density())
        populations = np.real(output.populations())
        expected = thermal_populations(0.2, populations.size)
        assert np.max(np.abs(populations - expected)) < 1e-6

    def test_dilation_and_kraus_agree(self):
        """Test the Stinespring and operator-sum backends agree."""
        spec = Attenuator(math.pi / 4, OmegaEnv(0.5))
        rho = to_fock(GaussianPure(alpha=0.5)).to_density()
        dilated = apply_channel(spec, rho, backend="stinespring")
        kraus = apply_channel(spec, rho, backend="kraus")
        assert trace_distance(dilated, kraus) < 1e-8

    @pytest.mark.slow
    def test_charfn_backend_agrees(self):
        """Test the characteristic-function backend agrees with the dilation."""
        spec = Attenuator(math.pi / 4, OmegaEnv(0.5))
        rho = FockVector.basis(1, 4).to_density()
        dilated = apply_channel(spec, rho, backend="stinespring")
        reconstructed = apply_channel(spec, rho, backend="charfn")
        assert trace_distance(dilated, reconstructed) < 1e-6

    def test_named_backend_falls_back(self):
        """Test components the named backend cannot apply go to the best backend."""
        output = apply_channel(ClassicalNoise(0.1), FockVector.basis(0, 4).to_density(), backend="stinespring")
        assert output.metadata["backend"] == "charfn"

    def test_composition_records_backends(self):
        """Test compositions record the backend of every component."""
        spec = Composition((Attenuator(0.3), Amplifier(0.1)))
        output = apply_channel(spec, FockVector.basis(1, 4).to_density())
        assert output.metadata["backends"] == ["stinespring", "stinespring"]
        assert abs(output.trace() - 1.0) < 1e-8

    def test_unknown_backend(self):
        """Test an unknown backend name raises."""
        with pytest.raises(BackendError, match="Unknown backend"):
            apply_channel(Attenuator(0.3), FockVector.basis(0, 4).to_density(), backend="nope")

    def test_z2_covariance(self):
        """Test PΞ(ρ)P = Ξ(PρP) for a parity-symmetric environment."""
        rho = to_fock(GaussianPure(alpha=0.6 + 0.2j)).to_density()
        assert z2_covariance_check(Attenuator(math.pi / 4, OmegaEnv(1.0)), rho) < 1e-8

    def test_alternative_dilation(self):
        """Test Ω₊ through a vacuum-environment channel at π/2 − ζ matches the Ω₊ environment."""
        direct = apply_channel(Attenuator(math.pi / 4, OmegaEnv(0.5)), FockVector.basis(0, 4).to_density())
        swapped = alternative_dilation_output(0.5)
        assert trace_distance(direct, swapped) < 1e-8

    def test_kraus_completeness(self):
        """Test the cut Kraus family is complete on the guarded block."""
        kraus = kraus_decomposition(Attenuator(0.4, OmegaEnv(0.5)), 16)
        assert completeness_defect(kraus) < 1e-6

    def test_output_is_valid_state(self):
        """Test outputs are Hermitian, unit trace and positive."""
        output = apply_channel(Amplifier(0.2, OmegaEnv(0.5)), FockVector.basis(1, 4).to_density())
        assert isinstance(output, DensityOperator)
        assert output.hermiticity_defect() < 1e-10
        assert abs(output.trace() - 1.0) < 1e-8
        assert output.eigenvalues().min() > -1e-10

    @pytest.mark.slow
    def test_backends_agree_on_squeezed_input(self):
        """Test all three backends give the same output for a squeezed input through an Ω₊ attenuator."""
        spec = Attenuator(math.pi / 4, OmegaEnv(0.5))
        rho = to_fock(GaussianPure(w=0.3)).to_density()
        outputs = {name: apply_channel(spec, rho, backend=name) for name in ("stinespring", "charfn", "kraus")}
        assert trace_distance(outputs["stinespring"], outputs["charfn"]) < 1e-6
        assert trace_distance(outputs["stinespring"], outputs["kraus"]) < 1e-6
        assert outputs["charfn"].metadata["tail_mass"] < settings.truncation.tail_tolerance

    def test_charfn_truncation_grows_with_output(self):
        """Test the reconstruction truncation is chosen by the output tail, not by the input size."""
        spec = Attenuator(math.pi / 4, OmegaEnv(0.5))
        output = apply_channel(spec, to_fock(GaussianPure(w=0.3)).to_density(), backend="charfn")
        assert output.tail_mass(settings.truncation.margin_fraction) < settings.truncation.tail_tolerance

    def test_dilation_leak_below_tolerance(self):
        """Test the dilation grows until the margin probability is below the leak tolerance."""
        output = apply_channel(Attenuator(math.pi / 4, OmegaEnv(0.5)), FockVector.basis(1, 4).to_density(),
                               backend="stinespring")
        assert output.metadata["leak"] < settings.truncation.leak_tolerance

    def test_pure_loss_on_single_photon(self):
        """Test the vacuum-environment attenuator maps |1⟩ to diag(sin²ζ, cos²ζ)."""
        zeta = 0.6
        output = apply_channel(Attenuator(zeta, VacuumEnv()), FockVector.basis(1, 4).to_density(), backend="kraus")
        expected = np.zeros((output.n_trunc, output.n_trunc))
        expected[0, 0], expected[1, 1] = math.sin(zeta) ** 2, math.cos(zeta) ** 2
        assert np.max(np.abs(output.matrix - expected)) < 1e-10

    def test_kraus_truncation_holds_environment(self):
        """Test a truncation smaller than the environment support is raised to it."""
        env = OmegaEnv(0.5)
        kraus = kraus_decomposition(Attenuator(0.4, env), 4)
        assert kraus[0].shape[1] >= env.support()
        assert completeness_defect(kraus) < 1e-6


class TestSymplectic:
    """Test symplectic matrices of the two-mode unitaries."""

    @pytest.mark.parametrize("kind, parameter", [("BS", 0.0), ("BS", 0.7), ("TM", 0.4), ("tm", 1.2)])
    def test_preserves_form(self, kind, parameter):
        """Test TᵀΩT = Ω and det T = 1."""
        matrix = symplectic_matrix(kind, parameter)
        assert matrix.form_defect() < 1e-12
        assert np.linalg.det(matrix.entries) == pytest.approx(1.0)

    def test_beamsplitter_at_quarter_turn(self):
        """Test ζ = π/2 swaps the modes up to sign."""
        entries = symplectic_matrix("BS", math.pi / 2).entries
        expected = np.block([[np.zeros((2, 2)), -np.eye(2)], [np.eye(2), np.zeros((2, 2))]])
        assert np.allclose(entries, expected)

    def test_unknown_kind(self):
        """Test only BS and TM are known."""
        with pytest.raises(ValueError, match="unknown symplectic kind"):
            symplectic_matrix("XX", 0.1)


class TestDilationLeak:
    """Test how the dilation reacts to output weight in the truncation margin."""

    def _capped(self):
        return Settings(truncation=TruncationSettings(two_mode_max=24))

    def test_leak_above_limit_at_cap_raises(self):
        """Test a large margin leak at the two-mode cap is an error."""
        with patch.object(Dilation, "leak", return_value=1e-3):
            with pytest.raises(TruncationRiskError, match="leaks"):
                dilate(Attenuator(0.3), FockVector.basis(1, 4).to_density(), config=self._capped())

    def test_small_leak_at_cap_is_accepted(self):
        """Test a leak between the tolerance and LEAK_LIMIT is returned at the cap."""
        with patch.object(Dilation, "leak", return_value=1e-9):
            _, _, leak = dilate(Attenuator(0.3), FockVector.basis(1, 4).to_density(), config=self._capped())
        assert leak == pytest.approx(1e-9)
        assert leak < LEAK_LIMIT

    def test_fixed_truncation_is_not_grown(self):
        """Test an explicit n_trunc is used even when the output leaks."""
        with patch.object(Dilation, "leak", return_value=1e-9):
            dilation, _, _ = dilate(Attenuator(0.3), FockVector.basis(1, 4).to_density(), n_trunc=6)
        assert dilation.n_trunc == 6

    def test_leak_counts_both_modes(self):
        """Test weight in the environment margin counts as leak."""
        dilation = build_dilation(Attenuator(math.pi / 2), 8)
        rho = np.zeros((8, 8))
        rho[7, 7] = 1.0
        assert dilation.leak(rho, 0.25) == pytest.approx(1.0)
