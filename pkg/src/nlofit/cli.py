"""Command-line interface.

Subcommands: simulate-zscan, fit-zscan, fit-peak, fit-fluence, analyze,
constants. Exit codes: 0 success, 1 fatal error, 2 usage error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__, optics, pumpprobe, zscan
from .config import AnalysisConfig, load_config
from .constants import CODATA
from .errors import ConfigError
from .report import emit_plot_data, run_analysis, validate_report
from .traceio import parse_trace_csv, zscan_trace_to_csv


def _load_config_or_fail(path: str | None, required: bool = True) -> AnalysisConfig | None:
    if path is None:
        if required:
            raise click.UsageError("a --config file is required for this command")
        return None
    try:
        return load_config(path)
    except ConfigError as exc:
        raise click.ClickException(str(exc))


def _read_csv_argument(csv_path: str) -> str:
    if csv_path == "-":
        return sys.stdin.read()
    try:
        return Path(csv_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise click.ClickException(f"cannot read {csv_path}: {exc}")


def _emit_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        click.echo(text)


@click.group()
@click.version_option(version=__version__)
def main() -> None:
    """Nonlinear-optical coefficient extraction from Z-scan and pump-probe data."""


@main.command("simulate-zscan")
@click.option("--dphi0", type=float, required=True, help="On-axis nonlinear phase shift (rad).")
@click.option("--dpsi0", type=float, default=0.0, show_default=True, help="Nonlinear loss parameter.")
@click.option("--z0-mm", type=float, required=True, help="Rayleigh length (mm).")
@click.option("--z-center-mm", type=float, default=0.0, show_default=True, help="Focal-plane offset (mm).")
@click.option("--baseline", type=float, default=1.0, show_default=True, help="Far-field normalization.")
@click.option("--z-min-mm", type=float, default=-1.0, show_default=True, help="Grid start (mm).")
@click.option("--z-max-mm", type=float, default=1.0, show_default=True, help="Grid end (mm).")
@click.option("--points", type=int, default=40, show_default=True, help="Number of grid points.")
@click.option("--noise", type=float, default=0.0, show_default=True, help="Relative noise level.")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True, help="RNG seed (u64).")
def simulate_zscan_cmd(dphi0, dpsi0, z0_mm, z_center_mm, baseline,
                       z_min_mm, z_max_mm, points, noise, seed) -> None:
    """Generate a synthetic closed-aperture trace as CSV on stdout."""
    try:
        params = zscan.ZscanParams(dphi0=dphi0, dpsi0=dpsi0, z0=z0_mm * 1e-3,
                                   z_center=z_center_mm * 1e-3, baseline=baseline)
        grid = np.linspace(z_min_mm * 1e-3, z_max_mm * 1e-3, points)
        trace = zscan.simulate_zscan(params, grid, noise_rel=noise, seed=seed)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    comment = (f"simulated: dphi0={dphi0} dpsi0={dpsi0} z0_mm={z0_mm} "
               f"z_center_mm={z_center_mm} baseline={baseline} noise={noise} seed={seed}")
    click.echo(zscan_trace_to_csv(trace, comments=[comment]), nl=False)


@main.command("fit-zscan")
@click.argument("csv_path", default="-")
@click.option("--config", "config_path", type=str, default=None,
              help="Config JSON; adds coefficient conversion to the output.")
@click.option("--out", type=str, default=None, help="Write JSON here instead of stdout.")
@click.option("--format", "fmt", type=click.Choice(["json"]), default="json", show_default=True)
def fit_zscan_cmd(csv_path, config_path, out, fmt) -> None:
    """Fit a Z-scan CSV (file or stdin) and report the parameters as JSON."""
    config = _load_config_or_fail(config_path, required=False)
    text = _read_csv_argument(csv_path)
    try:
        trace = parse_trace_csv(text, "zscan")
        options = config.fit_options if config else None
        fit = zscan.fit_zscan(trace, options=options)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    p = fit.params
    payload = {
        "params": {"dphi0": p.dphi0, "dpsi0": p.dpsi0, "z0_m": p.z0,
                   "z_center_m": p.z_center, "baseline": p.baseline},
        "sigma": fit.sigma,
        "residual_norm": fit.residual_norm,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "condition_flag": fit.condition_flag,
        "warnings": fit.warnings,
    }
    if config is not None:
        intensity = optics.peak_intensity(config.beam.fluence, config.beam.pulse_fwhm,
                                          config.beam.profile)
        l_eff = optics.effective_length(config.material.alpha, config.material.length)
        k = optics.vacuum_wavenumber(config.beam.wavelength)
        payload["coefficients"] = zscan.nlo_coefficients_from_zscan(fit, intensity, l_eff, k)
    _emit_json(payload, out)


@main.command("fit-peak")
@click.argument("csv_path", default="-")
@click.option("--config", "config_path", type=str, default=None,
              help="Config JSON; enables FWHM deconvolution against the pulse width.")
@click.option("--out", type=str, default=None, help="Write JSON here instead of stdout.")
@click.option("--format", "fmt", type=click.Choice(["json"]), default="json", show_default=True)
def fit_peak_cmd(csv_path, config_path, out, fmt) -> None:
    """Fit a Gaussian to a pump-probe CSV (file or stdin)."""
    config = _load_config_or_fail(config_path, required=False)
    text = _read_csv_argument(csv_path)
    try:
        trace = parse_trace_csv(text, "pumpprobe")
        fit = pumpprobe.fit_gaussian_peak(trace, options=config.fit_options if config else None)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    payload = {
        "amplitude": fit.amplitude,
        "t0_s": fit.t0,
        "fwhm_s": fit.fwhm,
        "baseline": fit.baseline,
        "sigma": fit.sigma,
        "residual_norm": fit.residual_norm,
        "converged": fit.converged,
        "condition_flag": fit.condition_flag,
    }
    if config is not None:
        try:
            payload["deconvolved_fwhm_s"] = pumpprobe.deconvolve_fwhm(
                fit.fwhm, config.beam.pulse_fwhm)
        except ValueError as exc:
            payload["deconvolved_fwhm_s"] = None
            payload["deconvolution_note"] = str(exc)
    _emit_json(payload, out)


@main.command("fit-fluence")
@click.argument("csv_path", default="-")
@click.option("--config", "config_path", type=str, required=True,
              help="Config JSON (supplies n0, m*, and the pulse width for kappa).")
@click.option("--out", type=str, default=None, help="Write JSON here instead of stdout.")
@click.option("--format", "fmt", type=click.Choice(["json"]), default="json", show_default=True)
def fit_fluence_cmd(csv_path, config_path, out, fmt) -> None:
    """Fit |dR/R| = a*I + b*I^2 to a fluence CSV and derive (n2, beta)."""
    from .report import analyze_fluence_series

    config = _load_config_or_fail(config_path, required=True)
    text = _read_csv_argument(csv_path)
    try:
        series = parse_trace_csv(text, "fluence")
        block, _ = analyze_fluence_series(series, config)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    _emit_json(block, out)


@main.command("analyze")
@click.option("--config", "config_path", type=str, required=True, help="Config JSON path.")
@click.option("--out", type=str, default=None, help="Write the report here instead of stdout.")
@click.option("--plot-dir", type=str, default=None,
              help="Also write per-sample TSV plot data and PNG figures here.")
@click.option("--format", "fmt", type=click.Choice(["json"]), default="json", show_default=True)
def analyze_cmd(config_path, out, plot_dir, fmt) -> None:
    """Run the full analysis described by a config file."""
    config = _load_config_or_fail(config_path, required=True)
    report = run_analysis(config)
    validate_report(report)
    _emit_json(report, out)
    if plot_dir:
        try:
            emit_plot_data(report, plot_dir)
            from .plots import render_report_figures

            render_report_figures(report, plot_dir)
        except OSError as exc:
            raise click.ClickException(f"cannot write plot data to {plot_dir}: {exc}")


@main.command("constants")
@click.option("--config", "config_path", type=str, required=True, help="Config JSON path.")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text",
              show_default=True)
def constants_cmd(config_path, fmt) -> None:
    """Print physical constants and derived beam diagnostics for a config."""
    from .report import _beam_diagnostics

    config = _load_config_or_fail(config_path, required=True)
    diagnostics = _beam_diagnostics(config)
    if fmt == "json":
        _emit_json({"constants": CODATA.as_dict(), "beam_diagnostics": diagnostics}, None)
        return
    click.echo("physical constants (SI):")
    for name, value in CODATA.as_dict().items():
        click.echo(f"  {name:<9} = {value:.10g}")
    click.echo("beam diagnostics:")
    click.echo(f"  w0   = {diagnostics['waist_m'] * 1e6:.2f} um")
    click.echo(f"  z0   = {diagnostics['rayleigh_length_m'] * 1e3:.4f} mm")
    click.echo(f"  Leff = {diagnostics['effective_length_m'] * 1e3:.6f} mm")
    click.echo(f"  I0   = {diagnostics['peak_intensity_w_m2']:.4g} W/m^2")
    click.echo(f"  k    = {diagnostics['vacuum_wavenumber_per_m']:.6g} 1/m")
    click.echo(f"  omega= {diagnostics['angular_frequency_rad_s']:.6g} rad/s")
    click.echo(f"  n(lambda)   = {diagnostics['refractive_index']:.4f}")
    n_half = diagnostics["refractive_index_half_wavelength"]
    click.echo(f"  n(lambda/2) = {'n/a' if n_half is None else format(n_half, '.4f')}")
    l_coh = diagnostics["shg_coherence_length_m"]
    click.echo(f"  L_coh       = {'n/a (no dispersion data)' if l_coh is None else format(l_coh * 1e6, '.3f') + ' um'}")


if __name__ == "__main__":
    main()
