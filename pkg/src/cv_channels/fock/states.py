"""Pure and mixed states on a truncated one- or two-mode Fock space."""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..exceptions import DimensionError, ValidityError


def _frozen(array: np.ndarray, dtype=complex) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def margin_size(n_trunc: int, margin_fraction: float) -> int:
    """Number of top indices treated as the truncation margin."""
    return max(1, int(math.ceil(margin_fraction * n_trunc)))


@dataclass(frozen=True)
class FockVector:
    """State vector in the truncated Fock basis.

    Two-mode vectors are indexed by (n, m) in row-major order: mode 0 is the
    slow index, mode 1 the fast one.

    Attributes:
        amplitudes: Read-only complex amplitudes of length n_trunc**mode_count
        n_trunc: Truncation per mode
        mode_count: 1 or 2
    """

    amplitudes: np.ndarray
    n_trunc: int
    mode_count: int = 1

    def __post_init__(self) -> None:
        if self.mode_count not in (1, 2):
            raise DimensionError(f"mode_count must be 1 or 2, got {self.mode_count}")
        if self.n_trunc < 1:
            raise DimensionError(f"n_trunc must be positive, got {self.n_trunc}")
        amplitudes = np.asarray(self.amplitudes).reshape(-1)
        if amplitudes.size != self.n_trunc ** self.mode_count:
            raise DimensionError(
                f"expected {self.n_trunc ** self.mode_count} amplitudes, got {amplitudes.size}"
            )
        object.__setattr__(self, "amplitudes", _frozen(amplitudes))

    @classmethod
    def from_amplitudes(
        cls,
        amplitudes: np.ndarray,
        mode_count: int = 1,
        normalize: bool = True,
    ) -> "FockVector":
        """Build a vector from raw amplitudes, normalizing by default.

        Raises:
            DimensionError: If the length is not a perfect power for mode_count
            ValidityError: If normalization is requested for a zero vector
        """
        amplitudes = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n_trunc = int(round(amplitudes.size ** (1.0 / mode_count)))
        if n_trunc ** mode_count != amplitudes.size:
            raise DimensionError(f"length {amplitudes.size} is not a {mode_count}-mode Fock dimension")
        if normalize:
            norm = np.linalg.norm(amplitudes)
            if norm <= 0:
                raise ValidityError("cannot normalize the zero vector")
            amplitudes = amplitudes / norm
        return cls(amplitudes=amplitudes, n_trunc=n_trunc, mode_count=mode_count)

    @classmethod
    def basis(cls, n: int, n_trunc: int, m: Optional[int] = None) -> "FockVector":
        """Number state |n> or, when m is given, the two-mode state |n, m>."""
        if m is None:
            if not 0 <= n < n_trunc:
                raise DimensionError(f"index {n} outside truncation {n_trunc}")
            amplitudes = np.zeros(n_trunc, dtype=complex)
            amplitudes[n] = 1.0
            return cls(amplitudes=amplitudes, n_trunc=n_trunc)
        if not (0 <= n < n_trunc and 0 <= m < n_trunc):
            raise DimensionError(f"index ({n}, {m}) outside truncation {n_trunc}")
        amplitudes = np.zeros(n_trunc * n_trunc, dtype=complex)
        amplitudes[n * n_trunc + m] = 1.0
        return cls(amplitudes=amplitudes, n_trunc=n_trunc, mode_count=2)

    @property
    def dimension(self) -> int:
        return self.n_trunc ** self.mode_count

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        """Photon-number distribution (single mode) or joint distribution (two modes)."""
        probs = np.abs(self.amplitudes) ** 2
        if self.mode_count == 2:
            return probs.reshape(self.n_trunc, self.n_trunc)
        return probs

    def tail_mass(self, margin_fraction: float) -> float:
        """Probability carried by any mode index inside the truncation margin."""
        start = self.n_trunc - margin_size(self.n_trunc, margin_fraction)
        probs = self.probabilities()
        if self.mode_count == 1:
            return float(probs[start:].sum())
        return float(probs[start:, :].sum() + probs[:start, start:].sum())

    def mean_photon_number(self) -> float:
        """Expectation of a†a (single mode only)."""
        if self.mode_count != 1:
            raise DimensionError("mean_photon_number needs a single-mode vector")
        return float(np.dot(np.arange(self.n_trunc), self.probabilities()))

    def inner(self, other: "FockVector") -> complex:
        """<self|other>."""
        if self.amplitudes.shape != other.amplitudes.shape:
            raise DimensionError("inner product of vectors with different dimensions")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def resized(self, n_trunc: int) -> "FockVector":
        """Zero-pad or cut each mode to a new truncation (no renormalization)."""
        if n_trunc == self.n_trunc:
            return self
        keep = min(n_trunc, self.n_trunc)
        if self.mode_count == 1:
            out = np.zeros(n_trunc, dtype=complex)
            out[:keep] = self.amplitudes[:keep]
        else:
            grid = self.amplitudes.reshape(self.n_trunc, self.n_trunc)
            out2 = np.zeros((n_trunc, n_trunc), dtype=complex)
            out2[:keep, :keep] = grid[:keep, :keep]
            out = out2.reshape(-1)
        return FockVector(amplitudes=out, n_trunc=n_trunc, mode_count=self.mode_count)

    def tensor(self, other: "FockVector") -> "FockVector":
        """Two-mode product |self> ⊗ |other> of single-mode vectors."""
        if self.mode_count != 1 or other.mode_count != 1 or self.n_trunc != other.n_trunc:
            raise DimensionError("tensor needs two single-mode vectors with equal truncation")
        return FockVector(amplitudes=np.kron(self.amplitudes, other.amplitudes),
                          n_trunc=self.n_trunc, mode_count=2)

    def parity_conjugated(self) -> "FockVector":
        """Apply the photon-number parity exp(iπ a†a) to a single-mode vector."""
        if self.mode_count != 1:
            raise DimensionError("parity conjugation is defined here for single-mode vectors")
        signs = np.where(np.arange(self.n_trunc) % 2 == 0, 1.0, -1.0)
        return FockVector(amplitudes=signs * self.amplitudes, n_trunc=self.n_trunc)

    def to_density(self) -> "DensityOperator":
        return DensityOperator(matrix=np.outer(self.amplitudes, self.amplitudes.conj()),
                               n_trunc=self.n_trunc, mode_count=self.mode_count)


@dataclass(frozen=True)
class DensityOperator:
    """Density matrix in the truncated Fock basis.

    Construction only checks shapes; ``validate`` checks hermiticity, trace
    and positivity against the library tolerances.
    """

    matrix: np.ndarray
    n_trunc: int
    mode_count: int = 1
    metadata: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.mode_count not in (1, 2):
            raise DimensionError(f"mode_count must be 1 or 2, got {self.mode_count}")
        matrix = np.asarray(self.matrix)
        dim = self.n_trunc ** self.mode_count
        if matrix.shape != (dim, dim):
            raise DimensionError(f"expected a {dim}x{dim} matrix, got {matrix.shape}")
        object.__setattr__(self, "matrix", _frozen(matrix))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, mode_count: int = 1) -> "DensityOperator":
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionError(f"density matrix must be square, got {matrix.shape}")
        n_trunc = int(round(matrix.shape[0] ** (1.0 / mode_count)))
        if n_trunc ** mode_count != matrix.shape[0]:
            raise DimensionError(f"size {matrix.shape[0]} is not a {mode_count}-mode Fock dimension")
        return cls(matrix=matrix, n_trunc=n_trunc, mode_count=mode_count)

    @property
    def dimension(self) -> int:
        return self.n_trunc ** self.mode_count

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def eigenvalues(self) -> np.ndarray:
        hermitian = 0.5 * (self.matrix + self.matrix.conj().T)
        return np.linalg.eigvalsh(hermitian)

    def validate(
        self,
        hermitian_tolerance: float = 1e-10,
        trace_tolerance: float = 1e-8,
        positivity_tolerance: float = 1e-8,
    ) -> "DensityOperator":
        """Check the density-operator invariants.

        Returns:
            self, for chaining

        Raises:
            ValidityError: If any invariant fails
        """
        defect = self.hermiticity_defect()
        if defect > hermitian_tolerance:
            raise ValidityError(f"density matrix not Hermitian: deviation {defect:.3e}")
        trace = self.trace()
        if abs(trace - 1.0) > trace_tolerance:
            raise ValidityError(f"density matrix trace {trace.real:.12f} differs from 1")
        min_eig = float(self.eigenvalues()[0])
        if min_eig < -positivity_tolerance:
            raise ValidityError(f"density matrix has negative eigenvalue {min_eig:.3e}")
        return self

    def purity(self) -> float:
        """tr(ρ²) for a Hermitian ρ."""
        return float(np.real(np.sum(self.matrix * self.matrix.T)))

    def expectation(self, operator: np.ndarray) -> complex:
        """tr(ρ·operator)."""
        return complex(np.sum(self.matrix * np.asarray(operator).T))

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.matrix)).copy()

    def tail_mass(self, margin_fraction: float) -> float:
        """Population inside the truncation margin of any mode."""
        start = self.n_trunc - margin_size(self.n_trunc, margin_fraction)
        pops = self.populations()
        if self.mode_count == 1:
            return float(pops[start:].sum())
        grid = pops.reshape(self.n_trunc, self.n_trunc)
        return float(grid[start:, :].sum() + grid[:start, start:].sum())

    def mean_photon_number(self) -> float:
        if self.mode_count != 1:
            raise DimensionError("mean_photon_number needs a single-mode state")
        return float(np.dot(np.arange(self.n_trunc), self.populations()))

    def resized(self, n_trunc: int) -> "DensityOperator":
        """Zero-pad or cut a single-mode state to a new truncation."""
        if self.mode_count != 1:
            raise DimensionError("resized is defined for single-mode states")
        if n_trunc == self.n_trunc:
            return self
        keep = min(n_trunc, self.n_trunc)
        out = np.zeros((n_trunc, n_trunc), dtype=complex)
        out[:keep, :keep] = self.matrix[:keep, :keep]
        return DensityOperator(matrix=out, n_trunc=n_trunc)

    def tensor(self, other: "DensityOperator") -> "DensityOperator":
        """Two-mode product state self ⊗ other."""
        if self.mode_count != 1 or other.mode_count != 1 or self.n_trunc != other.n_trunc:
            raise DimensionError("tensor needs two single-mode states with equal truncation")
        return DensityOperator(matrix=np.kron(self.matrix, other.matrix),
                               n_trunc=self.n_trunc, mode_count=2)

    def parity_conjugated(self) -> "DensityOperator":
        """exp(iπn) ρ exp(-iπn) for a single-mode state."""
        if self.mode_count != 1:
            raise DimensionError("parity conjugation is defined here for single-mode states")
        signs = np.where(np.arange(self.n_trunc) % 2 == 0, 1.0, -1.0)
        return DensityOperator(matrix=signs[:, None] * self.matrix * signs[None, :],
                               n_trunc=self.n_trunc)

    def with_metadata(self, **metadata) -> "DensityOperator":
        merged = dict(self.metadata)
        merged.update(metadata)
        return DensityOperator(matrix=self.matrix, n_trunc=self.n_trunc,
                               mode_count=self.mode_count, metadata=merged)
