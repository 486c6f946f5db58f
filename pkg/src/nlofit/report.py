"""Analysis orchestration and the versioned JSON report.

``run_analysis`` runs every configured input through its pipeline and
assembles a self-describing report: fitted parameters with uncertainties,
derived nonlinear coefficients, beam diagnostics, and a provenance block
(config echo, constants, design flags) sufficient to reproduce the run
bit-for-bit apart from the timestamp. ``emit_plot_data`` writes the
data/fit TSV pairs that external plotting consumes.
"""

from __future__ import annotations

import math
import re
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from . import optics, pumpprobe, zscan
from .config import AnalysisConfig, lab_view
from .constants import CODATA
from .traceio import parse_trace_csv

SCHEMA_VERSION = 1

_NUMBER = {"type": ["number", "null"]}
_VALUE_SIGMA = {
    "type": "object",
    "properties": {"value": {"type": "number"}, "sigma": {"type": "number"}},
    "required": ["value", "sigma"],
}

#: JSON Schema (draft-07) for the analysis report.
REPORT_SCHEMA: dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": [
        "schema_version", "toolkit_version", "generated_at",
        "provenance", "beam_diagnostics", "samples", "errors",
    ],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "toolkit_version": {"type": "string"},
        "generated_at": {"type": "string"},
        "provenance": {
            "type": "object",
            "required": ["config", "config_lab_view", "constants", "flags"],
            "properties": {
                "config": {"type": "object"},
                "config_lab_view": {"type": "object"},
                "constants": {"type": "object"},
                "flags": {"type": "object"},
            },
        },
        "beam_diagnostics": {
            "type": "object",
            "required": [
                "waist_m", "rayleigh_length_m", "effective_length_m",
                "peak_intensity_w_m2", "vacuum_wavenumber_per_m",
                "angular_frequency_rad_s", "refractive_index",
                "refractive_index_half_wavelength", "shg_coherence_length_m",
            ],
        },
        "samples": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["label", "kind", "source", "data"],
                "properties": {
                    "label": {"type": "string"},
                    "kind": {"enum": ["zscan", "pumpprobe", "fluence"]},
                    "source": {"type": "string"},
                    "data": {
                        "type": "object",
                        "required": ["abscissa", "ordinate", "abscissa_name", "ordinate_name"],
                        "properties": {
                            "abscissa": {"type": "array", "items": {"type": "number"}},
                            "ordinate": {"type": "array", "items": {"type": "number"}},
                        },
                    },
                    "zscan": {
                        "type": "object",
                        "required": ["params", "coefficients", "peak_valley", "converged"],
                        "properties": {
                            "params": {
                                "type": "object",
                                "properties": {name: _VALUE_SIGMA for name in
                                               ("dphi0", "dpsi0", "z0_m", "z_center_m", "baseline")},
                            },
                        },
                    },
                    "peak": {
                        "type": "object",
                        "required": ["amplitude", "t0_s", "fwhm_s", "baseline",
                                     "deconvolved_fwhm_s", "converged"],
                    },
                    "fluence": {
                        "type": "object",
                        "required": ["a", "b", "coefficients", "converged"],
                    },
                },
            },
        },
        "errors": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["source", "label", "kind", "error"],
            },
        },
    },
}


def validate_report(report: dict[str, Any]) -> None:
    """Raise jsonschema.ValidationError if the report violates the schema."""
    import jsonschema

    jsonschema.validate(report, REPORT_SCHEMA)


def _value_sigma(value: float, sigma: float) -> dict[str, float]:
    return {"value": float(value), "sigma": float(sigma)}


def _beam_diagnostics(config: AnalysisConfig) -> dict[str, Any]:
    beam = config.beam
    material = config.material
    waist = optics.beam_waist(beam)
    diagnostics: dict[str, Any] = {
        "waist_m": waist,
        "rayleigh_length_m": optics.rayleigh_length(waist, beam.wavelength),
        "effective_length_m": optics.effective_length(material.alpha, material.length),
        "peak_intensity_w_m2": optics.peak_intensity(beam.fluence, beam.pulse_fwhm, beam.profile),
        "vacuum_wavenumber_per_m": optics.vacuum_wavenumber(beam.wavelength),
        "angular_frequency_rad_s": optics.angular_frequency(beam.wavelength),
        "refractive_index": optics.refractive_index(material, beam.wavelength),
    }
    try:
        diagnostics["refractive_index_half_wavelength"] = optics.refractive_index(
            material, beam.wavelength / 2.0)
    except ValueError:
        diagnostics["refractive_index_half_wavelength"] = None
    try:
        diagnostics["shg_coherence_length_m"] = optics.coherence_length_shg(
            material, beam.wavelength)
    except ValueError:
        diagnostics["shg_coherence_length_m"] = None
    return diagnostics


def analyze_zscan_trace(trace: zscan.ZscanTrace, config: AnalysisConfig) -> dict[str, Any]:
    """Fit one Z-scan trace and derive (n2, beta, chi3) from the beam context."""
    fit = zscan.fit_zscan(trace, options=config.fit_options)
    intensity = optics.peak_intensity(config.beam.fluence, config.beam.pulse_fwhm,
                                      config.beam.profile)
    l_eff = optics.effective_length(config.material.alpha, config.material.length)
    k = optics.vacuum_wavenumber(config.beam.wavelength)
    coeffs = zscan.nlo_coefficients_from_zscan(fit, intensity, l_eff, k)
    re_chi3, im_chi3 = optics.chi3_from_coefficients(
        config.material.n0, coeffs["n2"], coeffs["beta"], k)
    pv = zscan.peak_valley_metrics(fit.params)
    p, s = fit.params, fit.sigma
    return {
        "params": {
            "dphi0": _value_sigma(p.dphi0, s["dphi0"]),
            "dpsi0": _value_sigma(p.dpsi0, s["dpsi0"]),
            "z0_m": _value_sigma(p.z0, s["z0"]),
            "z_center_m": _value_sigma(p.z_center, s["z_center"]),
            "baseline": _value_sigma(p.baseline, s["baseline"]),
        },
        "coefficients": {
            "n2_m2_per_w": _value_sigma(coeffs["n2"], coeffs["n2_sigma"]),
            "beta_m_per_w": _value_sigma(coeffs["beta"], coeffs["beta_sigma"]),
            "beta_lab": _value_sigma(config.units.from_si("beta", coeffs["beta"]),
                                     config.units.from_si("beta", coeffs["beta_sigma"])),
            "beta_lab_units": config.units.beta,
            "re_chi3_si": re_chi3,
            "im_chi3_si": im_chi3,
            "intensity_w_m2": intensity,
            "effective_length_m": l_eff,
            "vacuum_wavenumber_per_m": k,
        },
        "peak_valley": pv,
        "residual_norm": fit.residual_norm,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "condition_flag": fit.condition_flag,
        "warnings": fit.warnings,
    }


def analyze_pump_probe_trace(trace: pumpprobe.PumpProbeTrace,
                             config: AnalysisConfig) -> dict[str, Any]:
    """Gaussian-fit the transient and deconvolve against the pulse width."""
    fit = pumpprobe.fit_gaussian_peak(trace, options=config.fit_options)
    try:
        deconvolved = pumpprobe.deconvolve_fwhm(fit.fwhm, config.beam.pulse_fwhm)
        note = None
    except ValueError as exc:
        deconvolved = None
        note = str(exc)
    return {
        "amplitude": _value_sigma(fit.amplitude, fit.sigma["amplitude"]),
        "t0_s": _value_sigma(fit.t0, fit.sigma["t0"]),
        "fwhm_s": _value_sigma(fit.fwhm, fit.sigma["fwhm"]),
        "baseline": _value_sigma(fit.baseline, fit.sigma["baseline"]),
        "deconvolved_fwhm_s": deconvolved,
        "deconvolution_note": note,
        "pulse_fwhm_s": config.beam.pulse_fwhm,
        "residual_norm": fit.residual_norm,
        "converged": fit.converged,
        "condition_flag": fit.condition_flag,
    }


def analyze_fluence_series(series: pumpprobe.FluenceSeries,
                           config: AnalysisConfig) -> tuple[dict[str, Any],
                                                            pumpprobe.FluenceSeries]:
    """Fit a*I + b*I^2 and invert to (n2, beta); returns the block and the
    series actually fitted (fluence abscissas are converted to W/m^2 first)."""
    if series.meta.get("abscissa") == "fluence":
        converted = [optics.peak_intensity(f, config.beam.pulse_fwhm, config.beam.profile)
                     for f in series.intensity]
        series = pumpprobe.FluenceSeries(
            intensity=converted,
            abs_dr_over_r=series.abs_dr_over_r,
            meta={**series.meta, "abscissa": "intensity",
                  "converted_from": "fluence"},
        )
    fit = pumpprobe.fit_fluence_series(series, options=config.fit_options)
    omega = optics.angular_frequency(config.beam.wavelength)
    kappa = optics.tpa_index_kappa(omega, config.material.n0,
                                   config.material.m_star_ratio, config.beam.pulse_fwhm)
    derived = pumpprobe.nlo_coefficients_from_fluence(fit, config.material.n0, kappa)
    fit = fit.with_derived(derived)
    block = {
        "a": _value_sigma(fit.a, fit.a_sigma),
        "b": _value_sigma(fit.b, fit.b_sigma),
        "coefficients": {
            "n2_m2_per_w": _value_sigma(derived["n2"], derived["n2_sigma"]),
            "n2_abs_m2_per_w": derived["n2_abs"],
            "beta_m_per_w": _value_sigma(derived["beta"], derived["beta_sigma"]),
            "beta_lab": _value_sigma(config.units.from_si("beta", derived["beta"]),
                                     config.units.from_si("beta", derived["beta_sigma"])),
            "beta_lab_units": config.units.beta,
            "kappa_used": derived["kappa_used"],
            "m_star_ratio": config.material.m_star_ratio,
            "pulse_fwhm_s": config.beam.pulse_fwhm,
        },
        "residual_norm": fit.residual_norm,
        "converged": fit.converged,
        "condition_flag": fit.condition_flag,
    }
    return block, series


def _sample_block(spec_label: str, kind: str, source: str,
                  abscissa: np.ndarray, ordinate: np.ndarray,
                  names: tuple[str, str]) -> dict[str, Any]:
    return {
        "label": spec_label,
        "kind": kind,
        "source": source,
        "data": {
            "abscissa": [float(v) for v in abscissa],
            "ordinate": [float(v) for v in ordinate],
            "abscissa_name": names[0],
            "ordinate_name": names[1],
        },
    }


def run_analysis(config: AnalysisConfig) -> dict[str, Any]:
    """Run every configured input and assemble the report dict.

    Per-input failures become entries in ``report["errors"]``; the other
    inputs still run. The result is deterministic for fixed config and
    input files, apart from ``generated_at``.
    """
    samples: list[dict[str, Any]] = []
    errors: list[dict[str, str]] = []
    trace_meta = {"fluence": config.beam.fluence, "wavelength": config.beam.wavelength}
    for spec in config.inputs:
        try:
            text = Path(spec.path).read_text(encoding="utf-8")
            parsed = parse_trace_csv(text, spec.kind,
                                     meta={"label": spec.label, **trace_meta})
            if spec.kind == "zscan":
                block = _sample_block(spec.label, spec.kind, str(spec.path),
                                      parsed.z, parsed.transmittance,
                                      ("z_m", "transmittance"))
                block["zscan"] = analyze_zscan_trace(parsed, config)
            elif spec.kind == "pumpprobe":
                block = _sample_block(spec.label, spec.kind, str(spec.path),
                                      parsed.delay, parsed.dr_over_r,
                                      ("delay_s", "dr_over_r"))
                block["peak"] = analyze_pump_probe_trace(parsed, config)
            else:
                fl_block, fitted_series = analyze_fluence_series(parsed, config)
                block = _sample_block(spec.label, spec.kind, str(spec.path),
                                      fitted_series.intensity,
                                      fitted_series.abs_dr_over_r,
                                      ("intensity_w_m2", "abs_dr_over_r"))
                block["fluence"] = fl_block
            samples.append(block)
        except Exception as exc:
            errors.append({
                "source": str(spec.path),
                "label": spec.label,
                "kind": spec.kind,
                "error": f"{type(exc).__name__}: {exc}",
            })
    report = {
        "schema_version": SCHEMA_VERSION,
        "toolkit_version": __version__,
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "provenance": {
            "config": config.raw,
            "config_lab_view": lab_view(config),
            "constants": CODATA.as_dict(),
            "flags": {
                "wave_vector": "vacuum 2*pi/lambda",
                "tpa_generation": "N = beta*I^2*tau_p/(2*hbar*omega)",
                "intensity_profile": config.beam.profile,
                "m_star_ratio": config.material.m_star_ratio,
                "pulse_fwhm_s": config.beam.pulse_fwhm,
                "dpsi0_bound": "dpsi0 >= 0 during fitting",
                "weights": "unweighted least squares",
            },
        },
        "beam_diagnostics": _beam_diagnostics(config),
        "samples": samples,
        "errors": errors,
    }
    return report


# --- plot data ------------------------------------------------------------

_FIT_GRID_FACTOR = 10


def _sanitize(label: str) -> str:
    return re.sub(r"[^\w.-]+", "_", label.strip()) or "sample"


def _fit_curve(sample: dict[str, Any]) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the fitted model on a grid 10x denser than the data."""
    abscissa = np.asarray(sample["data"]["abscissa"], dtype=float)
    grid = np.linspace(abscissa[0], abscissa[-1], abscissa.size * _FIT_GRID_FACTOR)
    kind = sample["kind"]
    if kind == "zscan":
        p = sample["zscan"]["params"]
        params = zscan.ZscanParams(
            dphi0=p["dphi0"]["value"], dpsi0=p["dpsi0"]["value"],
            z0=p["z0_m"]["value"], z_center=p["z_center_m"]["value"],
            baseline=p["baseline"]["value"])
        return grid, zscan.transmittance_model(grid, params)
    if kind == "pumpprobe":
        p = sample["peak"]
        arg = (grid - p["t0_s"]["value"]) / p["fwhm_s"]["value"]
        curve = p["baseline"]["value"] + p["amplitude"]["value"] * np.exp(
            -4.0 * math.log(2.0) * arg * arg)
        return grid, curve
    p = sample["fluence"]
    return grid, p["a"]["value"] * grid + p["b"]["value"] * grid * grid


def _write_tsv(path: Path, header: tuple[str, str], xs, ys) -> None:
    lines = ["\t".join(header)]
    lines.extend(f"{x:.17g}\t{y:.17g}" for x, y in zip(xs, ys))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def emit_plot_data(report: dict[str, Any], out_dir: Path | str) -> list[Path]:
    """Write ``<sample>_<kind>_data.tsv`` and ``<sample>_<kind>_fit.tsv``
    for every sample in the report; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for sample in report["samples"]:
        stem = f"{_sanitize(sample['label'])}_{sample['kind']}"
        names = (sample["data"]["abscissa_name"], sample["data"]["ordinate_name"])
        data_path = out / f"{stem}_data.tsv"
        _write_tsv(data_path, names, sample["data"]["abscissa"], sample["data"]["ordinate"])
        written.append(data_path)
        grid, curve = _fit_curve(sample)
        fit_path = out / f"{stem}_fit.tsv"
        _write_tsv(fit_path, names, grid, curve)
        written.append(fit_path)
    return written
