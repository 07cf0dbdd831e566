"""Command line interface for cv_channels."""

import math
import sys
from pathlib import Path
from typing import List, Optional

import click
from pydantic import ValidationError

from .channels import BackendRegistry, list_available_backends
from .config.settings import Settings, settings
from .reporting.acceptance import run_acceptance
from .reporting.records import write_table
from .reporting.sweeps import (
    DEFAULT_GAINS_SQ,
    DEFAULT_ZETAS,
    contraction_records,
    delta_bound_records,
    entropy_records,
    noise_records,
    photon_number_records,
    resolve_e_grid,
    threshold_records,
)
from .utils.logging import get_logger, setup_logging

logger = get_logger(__name__)


def _parse_floats(ctx, param, value: Optional[str]) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        values = [float(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got '{value}'", ctx=ctx, param=param)
    if not values:
        raise click.BadParameter("at least one value is required", ctx=ctx, param=param)
    return values


def _parse_ints(ctx, param, value: Optional[str]) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        return [int(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got '{value}'", ctx=ctx, param=param)


def output_options(command):
    command = click.option('--out', '-o', type=click.Path(path_type=Path), default=None, help='Output table path')(command)
    command = click.option('--format', 'fmt', type=click.Choice(['csv', 'json']), default=None, help='Table format')(command)
    return command


def e_grid_option(command):
    return click.option('--e-grid', callback=_parse_floats, default=None,
                        help='Comma-separated energy constraints, e.g. "0.5,1,5"')(command)


def _output_path(command: str, out: Optional[Path], fmt: str) -> Path:
    out = out or settings.run.out
    if out is not None:
        return Path(out)
    return settings.output.directory / f"{command}.{fmt}"


def _write(command: str, records, out: Optional[Path], fmt: Optional[str]) -> None:
    fmt = fmt or settings.run.format or settings.output.format
    path = write_table(records, _output_path(command, out, fmt), fmt=fmt)
    click.echo(f"✅ {command}: {len(records)} rows written to {path}")


@click.group()
@click.option('--config', '-c', type=click.Path(exists=True), help='Configuration file path')
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose logging')
@click.option('--log-file', type=click.Path(), help='Log file path')
@click.pass_context
def cli(ctx, config, verbose, log_file):
    """cv-channels - Simulate bosonic channels with superposition environments."""
    ctx.ensure_object(dict)

    if config:
        ctx.obj['config_path'] = Path(config)
        try:
            settings.update_from(Settings.load_with_env(ctx.obj['config_path']))
        except ValidationError as e:
            raise click.UsageError(f"Invalid configuration in {config}: {e}")

    log_level = 'DEBUG' if verbose else settings.logging.level
    setup_logging(level=log_level, log_file=Path(log_file) if log_file else None)

    if config:
        logger.info(f"Using configuration: {config}")


@cli.command()
@e_grid_option
@output_options
def fig1(e_grid, fmt, out):
    """Rényi-2 entanglement after a 50:50 beamsplitter."""
    try:
        _write("fig1", entropy_records(resolve_e_grid("fig1", e_grid), show_progress=True), out, fmt)
    except Exception as e:
        logger.error(f"fig1 failed: {e}")
        sys.exit(1)


@cli.command()
@e_grid_option
@output_options
def fig2(e_grid, fmt, out):
    """Bounds on the nonclassicality distance of Ω₊ and of the channel output."""
    try:
        _write("fig2", delta_bound_records(resolve_e_grid("fig2", e_grid), show_progress=True), out, fmt)
    except Exception as e:
        logger.error(f"fig2 failed: {e}")
        sys.exit(1)


@cli.command()
@e_grid_option
@click.option('--n-trunc', type=click.IntRange(min=2), default=None, help='Explicit Fock truncation')
@output_options
def fig3(e_grid, n_trunc, fmt, out):
    """Photon-number distribution of Ω₊."""
    try:
        n_trunc = n_trunc or settings.run.n_trunc
        _write("fig3", photon_number_records(resolve_e_grid("fig3", e_grid), n_trunc=n_trunc), out, fmt)
    except Exception as e:
        logger.error(f"fig3 failed: {e}")
        sys.exit(1)


@cli.command()
@e_grid_option
@click.option('--noise', type=click.FloatRange(min=0.0), default=None,
              help='Test a single classical noise N instead of N_crit ± 0.05')
@output_options
def threshold(e_grid, noise, fmt, out):
    """Classicality verdicts around the critical noise."""
    try:
        noise = noise if noise is not None else settings.run.noise
        _write("threshold", threshold_records(resolve_e_grid("threshold", e_grid), noise=noise,
                                              show_progress=True), out, fmt)
    except Exception as e:
        logger.error(f"threshold failed: {e}")
        sys.exit(1)


@cli.command()
@e_grid_option
@click.option('--zeta', callback=_parse_floats, default=None, help='Comma-separated attenuator angles')
@click.option('--r', 'r', type=click.FloatRange(min=0.0, min_open=True), default=None,
              help='Use the amplifier with this squeezing instead of attenuators')
@output_options
def contraction(e_grid, zeta, r, fmt, out):
    """Heterodyne lower bound on the contraction coefficient."""
    try:
        if zeta is not None and any(not 0.0 <= z <= math.pi / 2 for z in zeta):
            raise click.BadParameter(f"angles must lie in [0, pi/2], got {zeta}", param_hint="--zeta")
        zetas = zeta or ([settings.run.zeta] if settings.run.zeta is not None else DEFAULT_ZETAS)
        r = r if r is not None else settings.run.r
        _write("contraction", contraction_records(resolve_e_grid("contraction", e_grid), zetas, r=r,
                                                  show_progress=True), out, fmt)
    except click.BadParameter:
        raise
    except Exception as e:
        logger.error(f"contraction failed: {e}")
        sys.exit(1)


@cli.command()
@e_grid_option
@click.option('--r', 'r', type=click.FloatRange(min=0.0, min_open=True), default=None, help='Amplifier squeezing')
@output_options
def noise(e_grid, r, fmt, out):
    """Mean second-moment noise through the amplifier."""
    try:
        r = r if r is not None else settings.run.r
        gains_sq = [math.cosh(r) ** 2] if r is not None else DEFAULT_GAINS_SQ
        _write("noise", noise_records(gains_sq, resolve_e_grid("noise", e_grid), show_progress=True), out, fmt)
    except Exception as e:
        logger.error(f"noise failed: {e}")
        sys.exit(1)


@cli.command()
@click.option('--only', callback=_parse_ints, default=None, help='Comma-separated criterion numbers')
@click.option('--progress/--no-progress', default=True, help='Show/hide progress meter')
def acceptance(only, progress):
    """Run the acceptance battery and print pass/fail."""
    try:
        results = run_acceptance(only, show_progress=progress)
    except Exception as e:
        logger.error(f"acceptance failed: {e}")
        sys.exit(1)

    click.echo("\n=== Acceptance ===")
    for result in results:
        mark = "✅" if result.passed else "❌"
        click.echo(f"{mark} {result.number:2d}. {result.title} ({result.seconds:.1f}s)")
        click.echo(f"      {result.detail}")
    failed = [r.number for r in results if not r.passed]
    if failed:
        click.echo(f"\n{len(failed)} of {len(results)} criteria failed: {failed}")
        sys.exit(1)
    click.echo(f"\n🎉 All {len(results)} criteria passed")


@cli.command()
@click.option('--save', type=click.Path(path_type=Path), default=None, help='Write the effective settings as YAML')
def config(save):
    """Show current configuration."""
    click.echo("📋 Current Configuration")
    click.echo("=" * 30)

    click.echo(f"\n🔢 Truncation:")
    click.echo(f"  Tail tolerance: {settings.truncation.tail_tolerance}")
    click.echo(f"  Start / max: {settings.truncation.n_start} / {settings.truncation.n_max}")
    click.echo(f"  Two-mode max: {settings.truncation.two_mode_max}")

    click.echo(f"\n🐱 Superposition:")
    click.echo(f"  Branch: {settings.omega.branch}")
    click.echo(f"  Cat amplitude: {settings.omega.cat_amplitude}")

    click.echo(f"\n📐 Quadrature:")
    click.echo(f"  Line integral tolerance: {settings.quadrature.tolerance}")
    click.echo(f"  Polar nodes: {settings.polar.radial_nodes} x {settings.polar.angular_nodes}")
    click.echo(f"  Classicality grid: ±{settings.grid.half_width}, {settings.grid.points} points")

    click.echo(f"\n💾 Output:")
    click.echo(f"  Directory: {settings.output.directory}")
    click.echo(f"  Format: {settings.output.format}")

    click.echo(f"\n📝 Logging Settings:")
    click.echo(f"  Level: {settings.logging.level}")
    click.echo(f"  Log File: {settings.logging.file_path}")

    if save:
        settings.save_to_file(save)
        click.echo(f"\n✅ Settings saved to {save}")


@cli.command()
def backends():
    """Show information about channel backends."""
    try:
        click.echo("🔌 Channel Backend Information\n")

        all_backends = BackendRegistry.get_backend_info()
        available_backends = list_available_backends()

        for name, info in all_backends.items():
            status = "✅ Available" if info['available'] else "❌ Not Available"
            click.echo(f"Backend: {name}")
            click.echo(f"  Status: {status}")
            click.echo(f"  Priority: {info['priority']}")
            click.echo(f"  Channels: {', '.join(info.get('supported_variants', []))}")
            click.echo()

        click.echo(f"🎯 Best Available Backend: {BackendRegistry.get_best_backend() or 'None'}")

        if not available_backends:
            click.echo("\n⚠️  No backends are available!")

    except Exception as e:
        logger.error(f"Failed to get backend info: {e}")
        sys.exit(1)


def main():
    """Main entry point."""
    cli()


if __name__ == '__main__':
    main()
