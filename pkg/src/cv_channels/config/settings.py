"""Configuration settings for the cv_channels simulation library."""

import os
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, validator


class TruncationSettings(BaseModel):
    """Fock-space truncation policy."""

    tail_tolerance: float = Field(default=1e-12, gt=0, lt=1e-3, description="Maximum tail mass of a converged state")
    margin_fraction: float = Field(default=0.25, ge=0.05, le=0.75, description="Fraction of indices treated as the truncation margin")
    n_start: int = Field(default=16, ge=2, description="First truncation tried by the adaptive search")
    n_max: int = Field(default=1200, ge=8, description="Largest single-mode truncation")
    two_mode_max: int = Field(default=64, ge=4, le=200, description="Largest per-mode truncation for dense two-mode unitaries")
    growth: float = Field(default=1.5, gt=1.0, le=4.0, description="Growth factor between adaptive truncation attempts")
    unitarity_tolerance: float = Field(default=1e-9, gt=0, description="Allowed unitarity defect on the guarded sub-block")
    leak_tolerance: float = Field(default=1e-14, gt=0, lt=1e-6, description="Output probability a dilation may leave in the truncation margin")

    @validator('two_mode_max')
    def validate_two_mode_max(cls, v, values):
        """Two-mode truncation cannot exceed the single-mode cap."""
        n_max = values.get('n_max')
        if n_max is not None and v > n_max:
            raise ValueError("two_mode_max must not exceed n_max")
        return v


class OmegaSettings(BaseModel):
    """Construction of the environment superposition."""

    branch: str = Field(default="+", pattern=r"^[+-]$", description="Superposition branch")
    cat_amplitude: str = Field(
        default="fock_table",
        pattern="^(isoenergetic|fock_table)$",
        description="Cat amplitude: r_c*sqrt(d_c) (isoenergetic) or r_c (fock_table)"
    )


class QuadratureSpec(BaseModel):
    """Adaptive trapezoid settings for coherent-line integrals."""

    half_width_factor: float = Field(default=8.0, gt=0, description="Integration half-width in units of sqrt(d-1)")
    initial_nodes: int = Field(default=65, ge=5, description="Nodes of the coarsest trapezoid rule")
    tolerance: float = Field(default=1e-8, gt=0, description="Agreement required between successive halvings")
    accuracy_limit: float = Field(default=1e-6, gt=0, description="Disagreement above which the result is rejected")
    max_refinements: int = Field(default=12, ge=1, le=20, description="Maximum number of step halvings")


class PolarQuadratureSettings(BaseModel):
    """Plane integration in polar coordinates."""

    radial_nodes: int = Field(default=64, ge=8, description="Gauss-Legendre nodes in radius")
    angular_nodes: int = Field(default=256, ge=16, description="Uniform nodes in angle")
    cutoff: float = Field(default=1e-14, gt=0, description="Integrand magnitude defining the outer radius")
    tolerance: float = Field(default=1e-6, gt=0, description="Change between doublings accepted as converged")
    reconstruction_tolerance: float = Field(default=1e-9, gt=0, description="Elementwise change accepted for density reconstruction")
    max_refinements: int = Field(default=3, ge=1, le=8, description="Maximum number of node doublings")
    max_radius: float = Field(default=60.0, gt=0, description="Upper limit on the outer radius search")
    chunk_size: int = Field(default=2048, ge=64, description="Nodes processed per vectorized block")


class GridSettings(BaseModel):
    """Uniform grid used by the envelope classicality test."""

    half_width: float = Field(default=8.0, gt=0, description="Grid covers |x|,|y| <= half_width")
    points: int = Field(default=801, ge=11, description="Points per axis")
    refine_factor: int = Field(default=10, ge=2, description="Spacing reduction per refinement level")
    refine_levels: int = Field(default=2, ge=0, le=4, description="Number of local refinement levels")
    near_tolerance: float = Field(default=1e-4, gt=0, description="Margins within this of zero trigger refinement")
    confirm_tolerance: float = Field(default=1e-7, gt=0, description="Margin required to confirm a violation")
    max_candidates: int = Field(default=48, ge=1, description="Candidate points refined per level")
    noise_floor: float = Field(default=1e-12, ge=0, description="Magnitude below which numeric characteristic functions are ignored")
    cover_revival: bool = Field(default=True, description="Widen the grid to contain the first revival of the interference factor")

    @validator('points')
    def validate_points(cls, v):
        """Odd point counts keep the origin on the grid."""
        if v % 2 == 0:
            raise ValueError("points must be odd so the grid contains the origin")
        return v


class OptimizerSettings(BaseModel):
    """Multi-start local search settings."""

    fidelity_starts: int = Field(default=16, ge=2, description="Starts for the minimal-fidelity search")
    sup_starts: int = Field(default=9, ge=1, description="Starts for coherent-overlap maximization")
    ftol: float = Field(default=1e-15, gt=0, description="L-BFGS-B function tolerance")
    gtol: float = Field(default=1e-11, gt=0, description="L-BFGS-B projected gradient tolerance")
    max_iterations: int = Field(default=500, ge=10, description="Iteration cap per start")
    stall_slack: float = Field(default=1e-3, ge=0, description="Bracket widening applied to flagged results")


class OutputSettings(BaseModel):
    """Table output settings."""

    format: str = Field(default="csv", pattern="^(csv|json)$", description="Table file format")
    directory: Path = Field(default=Path("./results"), description="Directory for command tables")
    significant_digits: int = Field(default=12, ge=4, le=17, description="Significant digits for floats")


class LoggingSettings(BaseModel):
    """Logging configuration."""

    level: str = Field(default="INFO", pattern="^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$", description="Log level")
    file_path: Optional[Path] = Field(default=None, description="Log file path")
    max_file_size: int = Field(default=10_485_760, description="Maximum log file size in bytes")  # 10MB
    backup_count: int = Field(default=5, description="Number of log file backups")


class RunConfig(BaseModel):
    """Flat command parameters mirroring the CLI flags."""

    e_grid: Optional[List[float]] = Field(default=None, description="Energy constraints to sweep")
    zeta: Optional[float] = Field(default=None, ge=0.0, le=1.5707963267948966, description="Attenuator angle")
    r: Optional[float] = Field(default=None, gt=0.0, description="Amplifier squeezing parameter")
    noise: Optional[float] = Field(default=None, ge=0.0, description="Classical noise N")
    n_trunc: Optional[int] = Field(default=None, ge=2, description="Explicit Fock truncation")
    format: Optional[str] = Field(default=None, pattern="^(csv|json)$", description="Output format")
    out: Optional[Path] = Field(default=None, description="Output table path")

    @validator('e_grid')
    def validate_e_grid(cls, v):
        """Energy constraints are nonnegative."""
        if v is not None and any(e < 0 for e in v):
            raise ValueError("e_grid entries must be nonnegative")
        return v


class Settings(BaseModel):
    """Main application settings."""

    truncation: TruncationSettings = Field(default_factory=TruncationSettings)
    omega: OmegaSettings = Field(default_factory=OmegaSettings)
    quadrature: QuadratureSpec = Field(default_factory=QuadratureSpec)
    polar: PolarQuadratureSettings = Field(default_factory=PolarQuadratureSettings)
    grid: GridSettings = Field(default_factory=GridSettings)
    optimizer: OptimizerSettings = Field(default_factory=OptimizerSettings)
    output: OutputSettings = Field(default_factory=OutputSettings)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)
    run: RunConfig = Field(default_factory=RunConfig)

    @classmethod
    def from_dict(cls, config_data: Optional[Dict[str, Any]]) -> "Settings":
        """Build settings from a parsed config mapping.

        Flat keys named like CLI flags (``e_grid``, ``zeta``, ...) are gathered
        into the ``run`` section; hyphenated spellings are accepted.
        """
        config_data = dict(config_data or {})
        run_data = dict(config_data.pop("run", None) or {})
        for key in list(config_data):
            field_name = key.replace("-", "_")
            if field_name in RunConfig.__fields__:
                run_data[field_name] = config_data.pop(key)
        return cls(run=RunConfig(**run_data), **config_data)

    @classmethod
    def from_file(cls, config_path: Optional[Path] = None) -> "Settings":
        """Load settings from configuration file."""
        if config_path is None:
            config_path = Path("cv_channels.yaml")

        if not config_path.exists():
            return cls()

        with open(config_path, 'r') as f:
            config_data = yaml.safe_load(f)

        return cls.from_dict(config_data)

    def save_to_file(self, config_path: Path) -> None:
        """Save settings to configuration file."""
        config_data = self.dict()

        def convert_paths(obj):
            if isinstance(obj, dict):
                return {k: convert_paths(v) for k, v in obj.items()}
            elif isinstance(obj, list):
                return [convert_paths(item) for item in obj]
            elif isinstance(obj, Path):
                return str(obj)
            else:
                return obj

        config_data = convert_paths(config_data)
        run_data = {k: v for k, v in config_data.pop("run").items() if v is not None}
        config_data.update(run_data)

        config_path.parent.mkdir(parents=True, exist_ok=True)

        with open(config_path, 'w') as f:
            yaml.dump(config_data, f, default_flow_style=False, indent=2)

    def update_from(self, other: "Settings") -> None:
        """Replace every section in place so modules holding this instance see the change."""
        for name in type(self).__fields__:
            setattr(self, name, getattr(other, name))

    @classmethod
    def load_with_env(cls, config_path: Optional[Path] = None) -> "Settings":
        """Load settings from file and environment variables."""
        load_dotenv()

        if config_path is None and os.getenv("CV_CHANNELS_CONFIG"):
            config_path = Path(os.getenv("CV_CHANNELS_CONFIG"))

        settings = cls.from_file(config_path)

        if os.getenv("CV_CHANNELS_LOG_LEVEL"):
            settings.logging.level = os.getenv("CV_CHANNELS_LOG_LEVEL").upper()

        if os.getenv("CV_CHANNELS_N_TRUNC"):
            settings.run.n_trunc = int(os.getenv("CV_CHANNELS_N_TRUNC"))

        if os.getenv("CV_CHANNELS_OUTPUT_DIR"):
            settings.output.directory = Path(os.getenv("CV_CHANNELS_OUTPUT_DIR"))

        return settings


# Global settings instance
settings = Settings.load_with_env()
