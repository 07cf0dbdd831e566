"""Channel specifications, environment descriptors and symplectic matrices."""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import lru_cache
from typing import ClassVar, Optional, Tuple, Union

import numpy as np

from ..config.settings import OmegaSettings, settings
from ..exceptions import DimensionError, DomainError, TruncationRiskError
from ..fock.operators import Beamsplitter, TwoModeSqueeze
from ..fock.states import FockVector
from ..states.charfn import CharFn, DensityCharFn, GaussianCharFn, OmegaCharFn
from ..states.gaussian import GaussianPure, max_distant_pair, to_fock
from ..states.superposition import OmegaState, build_omega, cat_amplitude

# Probability an environment may lose when cut to the joint truncation
ENV_CUT_TOLERANCE = 1e-10

SYMPLECTIC_FORM = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def fit_vector(vector: FockVector, n_trunc: int, label: str) -> FockVector:
    """Resize a single-mode vector, refusing cuts that drop noticeable probability."""
    resized = vector.resized(n_trunc)
    lost = 1.0 - resized.norm() ** 2
    if lost > ENV_CUT_TOLERANCE:
        raise TruncationRiskError(f"{label} loses probability {lost:.2e} at n_trunc={n_trunc}")
    return FockVector.from_amplitudes(resized.amplitudes, normalize=True)


def support_size(probabilities: np.ndarray, tolerance: float = ENV_CUT_TOLERANCE) -> int:
    """Smallest n such that indices >= n carry at most ``tolerance``."""
    tail = np.cumsum(probabilities[::-1])[::-1]
    beyond = np.flatnonzero(tail > tolerance)
    return int(beyond[-1] + 1) if beyond.size else 1


@lru_cache(maxsize=32)
def _omega_state(E: float, branch: str, convention: str) -> OmegaState:
    return build_omega(E, omega=OmegaSettings(branch=branch, cat_amplitude=convention))


class Environment(ABC):
    """Environment-mode state of a dilated channel."""

    parity_symmetric: ClassVar[bool] = True

    @abstractmethod
    def fock(self, n_trunc: int) -> FockVector:
        pass

    @abstractmethod
    def char_fn(self) -> CharFn:
        pass

    @abstractmethod
    def energy(self) -> float:
        pass

    @abstractmethod
    def support(self) -> int:
        """Truncation needed to hold the state up to ENV_CUT_TOLERANCE."""
        pass

    def is_parity_symmetric(self) -> bool:
        return self.parity_symmetric


@dataclass(frozen=True)
class VacuumEnv(Environment):
    def fock(self, n_trunc: int) -> FockVector:
        return FockVector.basis(0, n_trunc)

    def char_fn(self) -> CharFn:
        return GaussianCharFn.vacuum()

    def energy(self) -> float:
        return 0.0

    def support(self) -> int:
        return 1


@dataclass(frozen=True)
class OmegaEnv(Environment):
    """Ω₊ (or Ω₋) at energy constraint E; the convention defaults to the global settings."""

    E: float
    branch: str = "+"
    cat_amplitude: Optional[str] = None

    def __post_init__(self) -> None:
        if self.E < 0:
            raise DomainError(f"environment energy must be nonnegative, got {self.E}")

    @property
    def convention(self) -> str:
        return self.cat_amplitude or settings.omega.cat_amplitude

    def state(self) -> OmegaState:
        return _omega_state(float(self.E), self.branch, self.convention)

    def fock(self, n_trunc: int) -> FockVector:
        return fit_vector(self.state().fock, n_trunc, f"omega(E={self.E}) environment")

    def char_fn(self) -> CharFn:
        pair = max_distant_pair(self.E)
        return OmegaCharFn(gamma=cat_amplitude(pair, self.convention), w=pair.w, branch=self.branch)

    def energy(self) -> float:
        return self.state().e_tilde

    def support(self) -> int:
        return support_size(self.state().probabilities())


@dataclass(frozen=True)
class GaussianEnv(Environment):
    alpha: complex = 0.0
    w: complex = 0.0

    @property
    def gaussian(self) -> GaussianPure:
        return GaussianPure(alpha=self.alpha, w=self.w)

    def fock(self, n_trunc: int) -> FockVector:
        return fit_vector(to_fock(self.gaussian), n_trunc, f"gaussian(alpha={self.alpha}, w={self.w}) environment")

    def char_fn(self) -> CharFn:
        return self.gaussian.char_fn()

    def energy(self) -> float:
        return self.gaussian.energy()

    def support(self) -> int:
        return support_size(to_fock(self.gaussian).probabilities())

    def is_parity_symmetric(self) -> bool:
        return self.alpha == 0


@dataclass(frozen=True, eq=False)
class FockEnv(Environment):
    """Explicit normalized single-mode vector."""

    vector: FockVector

    def __post_init__(self) -> None:
        if self.vector.mode_count != 1:
            raise DimensionError("environment vectors are single-mode")
        if abs(self.vector.norm() - 1.0) > 1e-10:
            raise DomainError(f"environment vector is not normalized (norm {self.vector.norm():.12f})")

    def fock(self, n_trunc: int) -> FockVector:
        return fit_vector(self.vector, n_trunc, "explicit environment")

    def char_fn(self) -> CharFn:
        return DensityCharFn(self.vector.to_density())

    def energy(self) -> float:
        return self.vector.mean_photon_number()

    def support(self) -> int:
        return support_size(self.vector.probabilities())

    def is_parity_symmetric(self) -> bool:
        probs = self.vector.probabilities()
        return bool(probs[0::2].sum() < 1e-14 or probs[1::2].sum() < 1e-14)


class ChannelSpec:
    """Base class of the channel variants."""

    kind: ClassVar[str] = "channel"

    def is_z2_covariant(self) -> bool:
        raise NotImplementedError

    def components(self) -> Tuple["ChannelSpec", ...]:
        return (self,)


@dataclass(frozen=True)
class Attenuator(ChannelSpec):
    """Ξ_ζ: beamsplitter coupling to ``env``; ζ in [0, π/2]."""

    zeta: float
    env: Environment = VacuumEnv()
    kind: ClassVar[str] = "attenuator"

    def __post_init__(self) -> None:
        if not 0.0 <= self.zeta <= math.pi / 2 + 1e-12:
            raise DomainError(f"attenuator angle must lie in [0, pi/2], got {self.zeta}")

    def is_z2_covariant(self) -> bool:
        return self.env.is_parity_symmetric()

    def two_mode(self, input_energy: float = 0.0) -> Beamsplitter:
        return Beamsplitter(zeta=float(self.zeta))


@dataclass(frozen=True)
class Amplifier(ChannelSpec):
    """Ξ_r: two-mode squeezer coupling to ``env``; r > 0."""

    r: float
    env: Environment = VacuumEnv()
    kind: ClassVar[str] = "amplifier"

    def __post_init__(self) -> None:
        if not self.r > 0:
            raise DomainError(f"amplifier squeezing must be positive, got {self.r}")

    @property
    def gain_sq(self) -> float:
        return math.cosh(self.r) ** 2

    def is_z2_covariant(self) -> bool:
        return self.env.is_parity_symmetric()

    def two_mode(self, input_energy: float = 0.0) -> TwoModeSqueeze:
        return TwoModeSqueeze(r=float(self.r), input_energy=input_energy)


@dataclass(frozen=True)
class ClassicalNoise(ChannelSpec):
    """Φ_N: Gaussian convolution adding mean photon number N."""

    N: float
    kind: ClassVar[str] = "classical_noise"

    def __post_init__(self) -> None:
        if not self.N >= 0:
            raise DomainError(f"classical noise must be nonnegative, got {self.N}")

    def is_z2_covariant(self) -> bool:
        return True


@dataclass(frozen=True)
class Composition(ChannelSpec):
    """Components applied left to right."""

    channels: Tuple[ChannelSpec, ...]
    kind: ClassVar[str] = "composition"

    def __post_init__(self) -> None:
        if not self.channels:
            raise DomainError("a composition needs at least one channel")
        object.__setattr__(self, "channels", tuple(self.channels))

    def components(self) -> Tuple[ChannelSpec, ...]:
        out: Tuple[ChannelSpec, ...] = ()
        for channel in self.channels:
            out += channel.components()
        return out

    def is_z2_covariant(self) -> bool:
        return all(c.is_z2_covariant() for c in self.channels)


DilatedSpec = Union[Attenuator, Amplifier]


@dataclass(frozen=True, eq=False)
class SymplecticMatrix:
    """4×4 real matrix T with U†RU = RT for R = (q₀, p₀, q₁, p₁)."""

    entries: np.ndarray
    kind: str
    parameter: float

    def form_defect(self) -> float:
        """max |TᵀΩT − Ω|."""
        t = self.entries
        return float(np.max(np.abs(t.T @ SYMPLECTIC_FORM @ t - SYMPLECTIC_FORM)))


def symplectic_matrix(kind: str, parameter: float) -> SymplecticMatrix:
    """Symplectic matrix of the beamsplitter ("BS", ζ) or two-mode squeezer ("TM", r).

    BS: [[cos ζ·I, −sin ζ·I], [sin ζ·I, cos ζ·I]]
    TM: cosh r on the diagonal, sinh r·diag(1, −1) off the diagonal blocks
    """
    kind = kind.upper()
    if kind == "BS":
        c, s = math.cos(parameter), math.sin(parameter)
        eye = np.eye(2)
        entries = np.block([[c * eye, -s * eye], [s * eye, c * eye]])
    elif kind == "TM":
        ch, sh = math.cosh(parameter), math.sinh(parameter)
        flip = np.diag([1.0, -1.0])
        entries = np.block([[ch * np.eye(2), sh * flip], [sh * flip, ch * np.eye(2)]])
    else:
        raise ValueError(f"unknown symplectic kind {kind!r}; expected 'BS' or 'TM'")
    return SymplecticMatrix(entries=entries, kind=kind, parameter=float(parameter))
