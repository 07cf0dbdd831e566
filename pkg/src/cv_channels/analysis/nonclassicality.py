"""Classicality witnesses and bounds on the nonclassicality distance δ.

A state is classical iff |χ(x, y)| ≤ e^{−(x²+y²)/4} on the whole plane.
``classicality_test`` checks this on a finite grid with local refinement,
so its verdict is grid-relative. δ itself is never computed, only bounds
derived from the coherent-state overlap sup_β |⟨β|ψ⟩|² (pure states) or the
Husimi maximum sup_β ⟨β|ρ|β⟩ (mixed states).
"""

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

from ..channels.charfn_backend import char_fn_output
from ..channels.spec import Attenuator, ClassicalNoise, Composition, OmegaEnv
from ..config.settings import GridSettings, OmegaSettings, OptimizerSettings, settings
from ..exceptions import DomainError
from ..fock.phase_space import coherent_matrix
from ..fock.states import DensityOperator, FockVector
from ..states.charfn import CharFn, DensityCharFn, OmegaCharFn, ScaledProductCharFn
from ..states.gaussian import GaussianPure, max_distant_pair
from ..states.superposition import cat_amplitude
from ..utils.logging import get_logger
from ..utils.optimize import multistart_minimize

logger = get_logger(__name__)

# Rows of the coarse grid evaluated per vectorized block
_ROW_BLOCK = 16

# Side of the local grids used during refinement
_LOCAL_POINTS = 21

# Environment of the line witness: the cat the asymptotic output form describes
WITNESS_OMEGA = OmegaSettings(branch="+", cat_amplitude="isoenergetic")


@dataclass(frozen=True)
class Witness:
    """Point where |χ| exceeds the classical envelope.

    ``margin`` is |χ| − e^{−(x²+y²)/4}; ``log_ratio`` is log|χ| + (x²+y²)/4.
    """

    x: float
    y: float
    margin: float
    log_ratio: float


@dataclass(frozen=True)
class ClassicalityVerdict:
    """Grid-relative outcome of ``classicality_test``.

    A witness is reported only when the confirmation statistic (the log
    ratio for closed-form χ, the absolute margin otherwise) exceeds
    ``grid.confirm_tolerance`` after refinement.
    """

    classical_on_grid: bool
    witness: Optional[Witness]
    half_width: float
    points: int
    best_statistic: float
    candidates_refined: int


@dataclass(frozen=True)
class DeltaBounds:
    """lower ≤ δ ≤ upper from the optimized overlap ``sup_overlap``.

    ``flagged`` marks a stalled optimization; the lower bound is then
    widened by ``OptimizerSettings.stall_slack``.
    """

    lower: float
    upper: float
    sup_overlap: float
    beta: complex
    flagged: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.lower <= self.upper <= 2.0:
            raise ValueError(f"inconsistent delta bounds [{self.lower}, {self.upper}]")


@dataclass(frozen=True)
class MixedDeltaBound:
    """Husimi-based upper bound on δ(ρ), with the Ω₊ cap when one applies."""

    upper: float
    sup_q: float
    beta: complex
    omega_cap: Optional[float] = None
    flagged: bool = False

    @property
    def best(self) -> float:
        if self.omega_cap is None:
            return self.upper
        return min(self.upper, self.omega_cap)


@dataclass(frozen=True)
class LineWitness:
    """Envelope violation on the y = 0 line and the asymptotic prediction."""

    x: float
    margin: float
    predicted_x: float
    diagnostic: str = ""


def _omega_factors(charfn: CharFn, scale: float = 1.0) -> Iterator[Tuple[OmegaCharFn, float]]:
    if isinstance(charfn, OmegaCharFn):
        yield charfn, scale
    elif isinstance(charfn, ScaledProductCharFn):
        for factor, sx, _ in charfn.factors:
            yield from _omega_factors(factor, scale * abs(sx))


def revival_half_width(charfn: CharFn) -> float:
    """1.05 × the first revival of the cos(kx) interference factor, 0 if none."""
    width = 0.0
    for factor, scale in _omega_factors(charfn):
        k = math.sqrt(2.0) * factor.gamma * math.exp(-factor.w) * scale
        if k > 0:
            width = max(width, 1.05 * 2.0 * math.pi / k)
    return width


def _statistic(charfn: CharFn, x: np.ndarray, y: np.ndarray, noise_floor: float) -> np.ndarray:
    envelope_log = -(x * x + y * y) / 4.0
    if charfn.exact:
        return charfn.log_abs(x, y) - envelope_log
    magnitude = np.abs(charfn.evaluate(x, y))
    statistic = magnitude - np.exp(envelope_log)
    return np.where(magnitude < noise_floor, -np.inf, statistic)


def _coarse_scan(charfn: CharFn, axis: np.ndarray, noise_floor: float) -> np.ndarray:
    out = np.empty((axis.size, axis.size))
    for start in range(0, axis.size, _ROW_BLOCK):
        ys = axis[start:start + _ROW_BLOCK]
        x, y = np.meshgrid(axis, ys)
        out[start:start + ys.size] = _statistic(charfn, x, y, noise_floor)
    return out


def _refine(charfn: CharFn, x0: float, y0: float, spacing: float, grid: GridSettings) -> Tuple[float, float, float]:
    best = (x0, y0, float(_statistic(charfn, np.array(x0), np.array(y0), grid.noise_floor)))
    for _ in range(grid.refine_levels):
        spacing /= grid.refine_factor
        offsets = spacing * np.arange(-(_LOCAL_POINTS // 2), _LOCAL_POINTS // 2 + 1)
        x, y = np.meshgrid(best[0] + offsets, best[1] + offsets)
        values = _statistic(charfn, x, y, grid.noise_floor)
        i = np.unravel_index(int(np.argmax(values)), values.shape)
        if values[i] > best[2]:
            best = (float(x[i]), float(y[i]), float(values[i]))
    return best


def classicality_test(
    state: Union[CharFn, DensityOperator],
    grid: Optional[GridSettings] = None,
) -> ClassicalityVerdict:
    """Scan |χ| against e^{−(x²+y²)/4} on a square grid.

    Candidate points whose statistic is within ``grid.near_tolerance`` of
    zero (or above it) are refined on nested local grids; the best candidate
    whose refined statistic exceeds ``grid.confirm_tolerance`` becomes the
    witness.

    Args:
        state: Characteristic function, or a density operator evaluated with
            exact displacement matrix elements
        grid: Grid settings (defaults to the global settings)

    Returns:
        ClassicalityVerdict relative to the grid used
    """
    grid = grid or settings.grid
    charfn = DensityCharFn(state) if isinstance(state, DensityOperator) else state

    half_width = grid.half_width
    if grid.cover_revival:
        half_width = max(half_width, revival_half_width(charfn))
    axis = np.linspace(-half_width, half_width, grid.points)
    spacing = float(axis[1] - axis[0])

    statistic = _coarse_scan(charfn, axis, grid.noise_floor)
    flat = statistic.reshape(-1)
    order = np.argsort(flat)[::-1]
    candidates = [i for i in order[:grid.max_candidates] if flat[i] > -grid.near_tolerance]

    witness = None
    best_statistic = float(flat[order[0]])
    for index in candidates:
        row, col = divmod(int(index), axis.size)
        x, y, value = _refine(charfn, float(axis[col]), float(axis[row]), spacing, grid)
        best_statistic = max(best_statistic, value)
        if value > grid.confirm_tolerance and (witness is None or value > _confirmation(witness, charfn)):
            witness = _witness(charfn, x, y)

    if witness is not None:
        logger.debug(f"Envelope violation at ({witness.x:.4f}, {witness.y:.4f}), log ratio {witness.log_ratio:.3e}")
    return ClassicalityVerdict(
        classical_on_grid=witness is None,
        witness=witness,
        half_width=half_width,
        points=grid.points,
        best_statistic=best_statistic,
        candidates_refined=len(candidates),
    )


def _witness(charfn: CharFn, x: float, y: float) -> Witness:
    radius_sq = x * x + y * y
    log_abs = float(charfn.log_abs(x, y))
    return Witness(x=x, y=y, margin=math.exp(log_abs) - math.exp(-radius_sq / 4.0), log_ratio=log_abs + radius_sq / 4.0)


def _confirmation(witness: Witness, charfn: CharFn) -> float:
    return witness.log_ratio if charfn.exact else witness.margin


def gaussian_is_classical(cov: np.ndarray, tolerance: float = 1e-12) -> bool:
    """A Gaussian state is classical iff V − I/2 is positive semidefinite."""
    cov = np.asarray(cov, dtype=float)
    return bool(np.linalg.eigvalsh(0.5 * (cov + cov.T))[0] >= 0.5 - tolerance)


def attenuated_gaussian_covariance(zeta: float, cov_in: np.ndarray, cov_env: np.ndarray) -> np.ndarray:
    """Output covariance cos²ζ·V_in + sin²ζ·V_env of a beamsplitter channel."""
    c, s = math.cos(zeta), math.sin(zeta)
    return c * c * np.asarray(cov_in) + s * s * np.asarray(cov_env)


def _q_values(alphas: np.ndarray, vector: Optional[FockVector] = None, rho: Optional[DensityOperator] = None) -> np.ndarray:
    n = vector.n_trunc if vector is not None else rho.n_trunc
    bras = coherent_matrix(alphas, n).conj()
    if vector is not None:
        return np.abs(bras @ vector.amplitudes) ** 2
    return np.real(np.einsum("pm,mn,pn->p", bras, rho.matrix, bras.conj(), optimize=True))


def _coherent_sup(
    q: Callable[[np.ndarray], np.ndarray],
    energy: float,
    symmetric: bool,
    optimizer: OptimizerSettings,
) -> Tuple[float, complex, bool]:
    """Maximize a Husimi-type function over β with multi-start L-BFGS-B."""
    reach = math.sqrt(energy) + 4.0
    axis = np.linspace(-reach, reach, 41)
    re, im = np.meshgrid(axis, axis)
    betas = (re + 1j * im).reshape(-1)
    if symmetric:
        betas = betas[betas.real >= 0]
    coarse = q(betas)
    seeds = [0j] + [complex(b) for b in betas[np.argsort(coarse)[::-1][:optimizer.sup_starts - 1]]]
    starts = [[b.real, b.imag] for b in seeds]
    low = 0.0 if symmetric else -reach
    result = multistart_minimize(
        lambda v: -float(q(np.array([v[0] + 1j * v[1]]))[0]),
        starts,
        bounds=[(low, reach), (-reach, reach)],
        tie_key=lambda v: float(np.hypot(v[0], v[1])),
        tie_tolerance=1e-12,
        ftol=optimizer.ftol,
        gtol=optimizer.gtol,
        max_iterations=optimizer.max_iterations,
    )
    value = float(min(1.0, max(0.0, -result.fun)))
    return value, complex(result.x[0], result.x[1]), result.converged


def delta_bounds_pure(psi: FockVector, optimizer: Optional[OptimizerSettings] = None) -> DeltaBounds:
    """2(1 − S) ≤ δ(|ψ⟩⟨ψ|) ≤ 2√(1 − S) with S = sup_β |⟨β|ψ⟩|².

    The lower bound is used as printed in the literature for pure states;
    its tightness is not checked here. Parity-symmetric states are searched
    on the half plane Re β ≥ 0.

    Raises:
        DomainError: If ψ is not normalized
    """
    optimizer = optimizer or settings.optimizer
    if abs(psi.norm() - 1.0) > 1e-8:
        raise DomainError(f"state must be normalized, norm is {psi.norm():.10f}")
    probabilities = psi.probabilities()
    symmetric = bool(probabilities[0::2].sum() < 1e-14 or probabilities[1::2].sum() < 1e-14)

    sup, beta, converged = _coherent_sup(lambda b: _q_values(b, vector=psi), psi.mean_photon_number(),
                                         symmetric, optimizer)
    lower = 2.0 * (1.0 - sup)
    upper = 2.0 * math.sqrt(1.0 - sup)
    if not converged:
        lower = max(0.0, lower - 2.0 * optimizer.stall_slack)
        logger.warning(f"coherent overlap search stalled; lower bound widened to {lower:.6e}")
    return DeltaBounds(lower=min(lower, upper), upper=upper, sup_overlap=sup, beta=beta, flagged=not converged)


def delta_upper_mixed(
    rho: DensityOperator,
    omega_E: Optional[float] = None,
    optimizer: Optional[OptimizerSettings] = None,
    omega: Optional[OmegaSettings] = None,
) -> MixedDeltaBound:
    """δ(ρ) ≤ 2√(1 − sup_β ⟨β|ρ|β⟩).

    Args:
        rho: Single-mode state
        omega_E: When ρ = Ξ_{π/4}(|0⟩⟨0|) with an Ω₊(E) environment, also
            report δ(Ω₊)'s upper bound as the tighter cap
        optimizer: Optimizer settings
        omega: Convention used to build Ω₊ for the cap
    """
    optimizer = optimizer or settings.optimizer
    sup, beta, converged = _coherent_sup(lambda b: _q_values(b, rho=rho), rho.mean_photon_number(),
                                         False, optimizer)
    upper = 2.0 * math.sqrt(max(0.0, 1.0 - sup))
    cap = None
    if omega_E is not None:
        omega = omega or settings.omega
        state = OmegaEnv(omega_E, branch=omega.branch, cat_amplitude=omega.cat_amplitude).state()
        cap = delta_bounds_pure(state.fock, optimizer).upper
    return MixedDeltaBound(upper=upper, sup_q=sup, beta=beta, omega_cap=cap, flagged=not converged)


def even_cat_attenuation_distance(alpha: float) -> float:
    """e^{−α²}tanh α², the distance bound after splitting an even cat on a 50:50 beamsplitter."""
    if alpha < 0:
        raise DomainError(f"alpha must be nonnegative, got {alpha}")
    a2 = alpha * alpha
    return math.exp(-a2) * math.tanh(a2)


def even_cat_distance_maximum() -> Tuple[float, float]:
    """(α*, value) maximizing ``even_cat_attenuation_distance``."""
    result = minimize_scalar(lambda a: -even_cat_attenuation_distance(a), bounds=(0.0, 3.0), method="bounded",
                             options={"xatol": 1e-10})
    return float(result.x), float(-result.fun)


def even_cat_delta_upper(alpha: float) -> float:
    """2e^{−α²}sinh α², an upper bound on δ of the even cat itself."""
    a2 = alpha * alpha
    return 2.0 * math.exp(-a2) * math.sinh(a2)


def critical_noise(E: float) -> float:
    """N_crit = ½ − 1/(2d_c(E)); Ξ_{π/4}∘Φ_N(|β⟩⟨β|) is nonclassical for N < N_crit."""
    pair = max_distant_pair(E)
    return 0.5 - 0.5 / pair.d_c


def noise_factor_c(x: Union[float, np.ndarray], E: float, convention: Optional[str] = None) -> np.ndarray:
    """c(x) = |cos(kx) + z|/(1 + z) with z = e^{−2γ²} and k = γe^{−w}."""
    pair = max_distant_pair(E)
    gamma = cat_amplitude(pair, convention or settings.omega.cat_amplitude)
    z = math.exp(-2.0 * gamma ** 2)
    k = gamma * math.exp(-pair.w)
    return np.abs(np.cos(k * np.asarray(x, dtype=float)) + z) / (1.0 + z)


def asymptotic_output_charfn(x: Union[float, np.ndarray], y: Union[float, np.ndarray], E: float) -> np.ndarray:
    """Large-E form of χ of Ξ_{π/4}(|0⟩⟨0|):

    f(x, y) = e^{−(x²+y²)/8}·e^{−(e^{−2w}x²+e^{2w}y²)/8}·cos(e^w x/2)
    """
    w = max_distant_pair(E).w
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (np.exp(-(x * x + y * y) / 8.0) * np.exp(-(math.exp(-2 * w) * x * x + math.exp(2 * w) * y * y) / 8.0)
            * np.cos(math.exp(w) * x / 2.0))


def attenuated_noise_charfn(
    E: float,
    N: float,
    zeta: float = math.pi / 4,
    alpha: complex = 0.0,
    omega: Optional[OmegaSettings] = None,
) -> CharFn:
    """Closed-form χ of Ξ_ζ∘Φ_N(|α⟩⟨α|) with an Ω₊(E) environment."""
    omega = omega or settings.omega
    channel = Composition((ClassicalNoise(N),
                           Attenuator(zeta, OmegaEnv(E, branch=omega.branch, cat_amplitude=omega.cat_amplitude))))
    return char_fn_output(channel, GaussianPure(alpha=alpha).char_fn())


def noise_threshold_verdicts(
    E: float,
    offset: float = 0.05,
    grid: Optional[GridSettings] = None,
) -> Tuple[float, ClassicalityVerdict, ClassicalityVerdict]:
    """(N_crit, verdict at N_crit − offset, verdict at N_crit + offset)."""
    n_crit = critical_noise(E)
    below = classicality_test(attenuated_noise_charfn(E, max(0.0, n_crit - offset)), grid)
    above = classicality_test(attenuated_noise_charfn(E, n_crit + offset), grid)
    return n_crit, below, above


def line_witness(
    E: float,
    alpha: complex = 0.0,
    points: int = 4001,
    omega: Optional[OmegaSettings] = None,
) -> LineWitness:
    """Largest envelope violation of χ of Ξ_{π/4}(|α⟩⟨α|) on y = 0.

    The scan covers x ∈ [0, L] with L large enough for the first revival;
    the best grid point is polished with a bounded scalar search. The
    predicted location is the same search applied to the asymptotic form,
    which describes the isoenergetic cat, so that is the default environment.

    Raises:
        DomainError: If E ≤ 0
    """
    if E <= 0:
        raise DomainError(f"the line witness needs E > 0, got {E}")
    omega = omega or WITNESS_OMEGA
    env = OmegaEnv(E, branch=omega.branch, cat_amplitude=omega.cat_amplitude)
    charfn = char_fn_output(Attenuator(math.pi / 4, env), GaussianPure(alpha=alpha).char_fn())
    length = max(settings.grid.half_width, revival_half_width(charfn))
    xs = np.linspace(0.0, length, points)
    step = xs[1] - xs[0]

    def margin(x):
        return np.abs(charfn.evaluate(x, 0.0)) - np.exp(-np.asarray(x) ** 2 / 4.0)

    def predicted(x):
        return np.abs(asymptotic_output_charfn(x, 0.0, E)) - np.exp(-np.asarray(x) ** 2 / 4.0)

    def polish(fn, values) -> Tuple[float, float]:
        i = int(np.argmax(values))
        low, high = max(0.0, xs[i] - step), min(length, xs[i] + step)
        result = minimize_scalar(lambda x: -float(fn(x)), bounds=(low, high), method="bounded",
                                 options={"xatol": 1e-12})
        if -result.fun >= values[i]:
            return float(result.x), float(-result.fun)
        return float(xs[i]), float(values[i])

    x_star, best = polish(margin, margin(xs))
    predicted_x, _ = polish(predicted, predicted(xs))
    diagnostic = "" if best > 0 else f"no violation on [0, {length:.2f}] at E={E}"
    if diagnostic:
        logger.info(diagnostic)
    return LineWitness(x=x_star, margin=best, predicted_x=predicted_x, diagnostic=diagnostic)
