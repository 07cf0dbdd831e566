"""Tests for truncated Fock-space algebra."""

import math

import numpy as np
import pytest
from scipy.special import eval_genlaguerre, eval_laguerre

from cv_channels.exceptions import DimensionError, TruncationRiskError, ValidityError
from cv_channels.fock import (
    Beamsplitter,
    DensityOperator,
    FockVector,
    TwoModeSqueeze,
    char_fn_numeric,
    coherent_amplitudes,
    converge_truncation,
    displacement,
    displacement_elements,
    ladder_matrices,
    partial_trace,
    quadratures,
    squeeze,
    two_mode_unitary,
    weyl_beta,
)
from cv_channels.fock.operators import apply_blocks, reduced_from_vector, two_mode_blocks
from cv_channels.fock.phase_space import char_fn_exact, weyl_xy
from cv_channels.states.superposition import build_omega, char_fn_closed_form


class TestOperators:
    """Test single-mode operators."""

    def test_commutator_away_from_edge(self):
        """Test [a, a†] = 1 below the last index."""
        a, ad, _ = ladder_matrices(10)
        commutator = a @ ad - ad @ a
        assert np.allclose(commutator[:9, :9], np.eye(9))

    def test_dimension_check(self):
        """Test truncations below 2 are rejected."""
        with pytest.raises(DimensionError, match="at least 2"):
            ladder_matrices(1)

    def test_vacuum_quadrature_variance(self):
        """Test Var q = Var p = 1/2 in the vacuum."""
        q, p = quadratures(6)
        vacuum = FockVector.basis(0, 6).to_density()
        assert vacuum.expectation(q @ q).real == pytest.approx(0.5)
        assert vacuum.expectation(p @ p).real == pytest.approx(0.5)

    def test_displacement_makes_coherent_state(self):
        """Test D(α)|0⟩ matches the coherent amplitudes."""
        alpha = 0.8 - 0.3j
        column = displacement(alpha, 40)[:, 0]
        assert np.max(np.abs(column[:20] - coherent_amplitudes(alpha, 20))) < 1e-10

    def test_displacement_guard(self):
        """Test a large displacement at a small truncation is refused."""
        with pytest.raises(TruncationRiskError, match="displacement"):
            displacement(3.0, 10)

    def test_displacement_guard_override(self):
        """Test the guard can be overridden explicitly."""
        assert displacement(3.0, 10, allow_truncation_risk=True).shape == (10, 10)

    def test_squeezed_vacuum_energy(self):
        """Test ⟨a†a⟩ = sinh² r for S(r)|0⟩."""
        r = 0.4
        vector = FockVector(amplitudes=squeeze(r, 60)[:, 0], n_trunc=60)
        assert vector.mean_photon_number() == pytest.approx(math.sinh(r) ** 2, abs=1e-10)

    def test_exact_displacement_elements(self):
        """Test the recurrence elements agree with the exponentiated operator on a low block."""
        beta = 0.5 + 0.4j
        exact = displacement_elements(beta, 8)
        dense = displacement(beta, 60)[:8, :8]
        assert np.max(np.abs(exact - dense)) < 1e-10


class TestTwoMode:
    """Test two-mode unitaries."""

    def test_hong_ou_mandel(self):
        """Test U_BS(π/4)|1,1⟩ = (|2,0⟩ − |0,2⟩)/√2."""
        unitary = two_mode_unitary(Beamsplitter(zeta=math.pi / 4), 3)
        output = unitary @ FockVector.basis(1, 3, 1).amplitudes
        expected = (FockVector.basis(2, 3, 0).amplitudes - FockVector.basis(0, 3, 2).amplitudes) / math.sqrt(2.0)
        assert np.max(np.abs(output - expected)) < 1e-12

    def test_complex_angle_hong_ou_mandel(self):
        """Test ζ = iπ/4 gives i(|0,2⟩ + |2,0⟩)/√2."""
        unitary = two_mode_unitary(Beamsplitter(zeta=1j * math.pi / 4), 3)
        output = unitary @ FockVector.basis(1, 3, 1).amplitudes
        expected = 1j * (FockVector.basis(2, 3, 0).amplitudes + FockVector.basis(0, 3, 2).amplitudes) / math.sqrt(2.0)
        assert np.max(np.abs(output - expected)) < 1e-12

    def test_beamsplitter_is_unitary(self):
        """Test the beamsplitter conserves photon number and is exactly unitary."""
        unitary = two_mode_unitary(Beamsplitter(zeta=0.7), 6)
        assert np.max(np.abs(unitary.conj().T @ unitary - np.eye(36))) < 1e-12

    def test_two_mode_squeezed_vacuum(self):
        """Test U_TM(r)|0,0⟩ = Σ tanh(r)ⁿ/cosh(r) |n,n⟩."""
        r = 0.3
        n = 40
        blocks = two_mode_blocks(TwoModeSqueeze(r=r), n)
        output = apply_blocks(blocks, FockVector.basis(0, n, 0).amplitudes).reshape(n, n)
        expected = np.tanh(r) ** np.arange(6) / math.cosh(r)
        assert np.max(np.abs(np.diag(output)[:6] - expected)) < 1e-9

    def test_squeezer_guard(self):
        """Test the gain-aware guard refuses a small truncation."""
        with pytest.raises(TruncationRiskError, match="two-mode squeeze"):
            two_mode_blocks(TwoModeSqueeze(r=1.0, input_energy=2.0), 20)

    def test_partial_trace_of_product(self):
        """Test tracing out one factor of a product state."""
        first = FockVector.from_amplitudes(np.array([1.0, 1.0j, 0.5, 0.0]))
        second = FockVector.basis(2, 4)
        joint = first.to_density().tensor(second.to_density())
        assert np.allclose(partial_trace(joint, 0).matrix, first.to_density().matrix)
        assert np.allclose(partial_trace(joint, 1).matrix, second.to_density().matrix)

    def test_reduced_from_vector_matches_partial_trace(self):
        """Test the pure-state shortcut equals the density partial trace."""
        unitary = two_mode_unitary(Beamsplitter(zeta=0.4), 4)
        vector = FockVector(amplitudes=unitary @ FockVector.basis(1, 4, 2).amplitudes, n_trunc=4, mode_count=2)
        for keep in (0, 1):
            shortcut = reduced_from_vector(vector.amplitudes, 4, keep)
            assert np.allclose(shortcut, partial_trace(vector.to_density(), keep).matrix)


class TestStates:
    """Test state containers."""

    def test_basis_out_of_range(self):
        """Test number states beyond the truncation are rejected."""
        with pytest.raises(DimensionError, match="outside truncation"):
            FockVector.basis(5, 4)

    def test_normalize_zero_vector(self):
        """Test the zero vector cannot be normalized."""
        with pytest.raises(ValidityError, match="zero vector"):
            FockVector.from_amplitudes(np.zeros(4))

    def test_two_mode_length(self):
        """Test a non-square length is not a two-mode dimension."""
        with pytest.raises(DimensionError, match="2-mode"):
            FockVector.from_amplitudes(np.ones(5), mode_count=2)

    def test_validate_rejects_trace(self):
        """Test a density matrix with trace 2 fails validation."""
        rho = DensityOperator(matrix=np.eye(2), n_trunc=2)
        with pytest.raises(ValidityError, match="trace"):
            rho.validate()

    def test_parity_conjugation_flips_coherent_state(self):
        """Test P|α⟩ = |−α⟩."""
        alpha = 0.7 + 0.2j
        vector = FockVector.from_amplitudes(coherent_amplitudes(alpha, 30))
        flipped = FockVector.from_amplitudes(coherent_amplitudes(-alpha, 30))
        assert np.allclose(vector.parity_conjugated().amplitudes, flipped.amplitudes)

    def test_resized_pads_with_zeros(self):
        """Test resizing pads without renormalizing."""
        rho = FockVector.basis(1, 3).to_density().resized(5)
        assert rho.n_trunc == 5
        assert rho.populations().tolist() == [0.0, 1.0, 0.0, 0.0, 0.0]

    def test_amplitudes_are_read_only(self):
        """Test state arrays cannot be mutated in place."""
        vector = FockVector.basis(0, 3)
        with pytest.raises(ValueError):
            vector.amplitudes[0] = 2.0


class TestTruncation:
    """Test adaptive truncation."""

    def test_converges_for_coherent_state(self):
        """Test the tail criterion accepts a coherent state."""
        result = converge_truncation(lambda n: FockVector.from_amplitudes(coherent_amplitudes(1.5, n)),
                                     label="coherent")
        assert result.tail_mass < 1e-12
        assert result.state.n_trunc == result.n_trunc

    def test_cap_raises(self):
        """Test reaching the cap without convergence raises."""
        with pytest.raises(TruncationRiskError, match="did not converge"):
            converge_truncation(lambda n: FockVector.from_amplitudes(np.ones(n)), n_max=20, label="flat")


class TestPhaseSpace:
    """Test characteristic functions of Fock states."""

    def test_weyl_round_trip(self):
        """Test weyl_xy inverts weyl_beta."""
        x, y = weyl_xy(complex(weyl_beta(0.3, -1.2)))
        assert (x, y) == pytest.approx((0.3, -1.2))

    def test_vacuum_char_fn(self):
        """Test χ of the vacuum is e^{−(x²+y²)/4}."""
        vacuum = FockVector.basis(0, 8).to_density()
        x = np.array([0.0, 1.0, -2.0])
        y = np.array([0.5, 0.0, 1.5])
        assert np.allclose(char_fn_exact(vacuum, x, y), np.exp(-(x * x + y * y) / 4.0))

    def test_numeric_matches_exact(self):
        """Test the exponentiated generator agrees with exact matrix elements."""
        rho = FockVector.from_amplitudes(coherent_amplitudes(0.6, 30)).to_density()
        x = np.linspace(-2.0, 2.0, 5)
        y = np.linspace(1.0, -1.0, 5)
        assert np.max(np.abs(char_fn_numeric(rho, x, y) - char_fn_exact(rho, x, y))) < 1e-8

    def test_displacement_elements_match_laguerre_form(self):
        """Test ⟨m|D(β)|n⟩ = √(n!/m!) β^{m−n} e^{−|β|²/2} L_n^{(m−n)}(|β|²) and its m < n mirror."""
        beta, n_trunc = 1.3 - 0.7j, 12
        x = abs(beta) ** 2
        expected = np.zeros((n_trunc, n_trunc), dtype=complex)
        for m in range(n_trunc):
            for n in range(n_trunc):
                low, k = min(m, n), abs(m - n)
                base = beta if m >= n else -np.conj(beta)
                expected[m, n] = (math.sqrt(math.factorial(low) / math.factorial(low + k)) * base ** k
                                  * math.exp(-x / 2.0) * eval_genlaguerre(low, k, x))
        assert np.max(np.abs(displacement_elements(beta, n_trunc) - expected)) < 1e-12

    def test_high_number_state_char_fn(self):
        """Test χ of |60⟩ is e^{−|β|²/2} L₆₀(|β|²) with |β|² = (x² + y²)/2."""
        rho = FockVector.basis(60, 80).to_density()
        x, y = 2.0, 1.0
        expected = math.exp(-(x * x + y * y) / 4.0) * eval_laguerre(60, (x * x + y * y) / 2.0)
        assert complex(char_fn_exact(rho, x, y)) == pytest.approx(expected, abs=1e-10)

    def test_coherent_char_fn_at_large_truncation(self):
        """Test χ of a coherent state is e^{−(x²+y²)/4} e^{i(x⟨q⟩+y⟨p⟩)} with 200 levels."""
        alpha = 4.0 + 3.0j
        rho = FockVector.from_amplitudes(coherent_amplitudes(alpha, 200)).to_density()
        x = np.array([-3.0, 0.5, 2.0, 3.0])
        y = np.array([-3.0, 1.5, -0.5, 2.5])
        q, p = math.sqrt(2.0) * alpha.real, math.sqrt(2.0) * alpha.imag
        expected = np.exp(-(x * x + y * y) / 4.0) * np.exp(1j * (x * q + y * p))
        assert np.max(np.abs(char_fn_exact(rho, x, y) - expected)) < 1e-9

    @pytest.mark.slow
    def test_energetic_cat_char_fn_is_bounded(self):
        """Test |χ| ≤ 1 far from the origin for the E = 10 cat, where large-k elements dominate."""
        state = build_omega(10.0)
        x = np.array([-3.0, 3.0, 4.0])
        y = np.array([-3.0, -3.0, 4.0])
        values = char_fn_exact(state.density(), x, y)
        expected = char_fn_closed_form(state.gamma, state.w, state.branch).evaluate(x, y)
        assert np.all(np.abs(values) <= 1.0 + 1e-9)
        assert np.max(np.abs(values - expected)) < 1e-6
