"""Analysis configuration: JSON document, laboratory units at the boundary,
SI inside.

The config mirrors the analysis inputs one-to-one::

    {
      "material": {"n0": 2.4, "alpha": 10.0, "length": 0.3,
                    "sellmeier": "diamond", "m_star_ratio": 0.57,
                    "label": "diamond"},
      "beam":     {"wavelength": 800.0, "na": 0.06, "waist": null,
                    "pulse_fwhm": 50.0, "fluence": 20.0,
                    "profile": "flat-top"},
      "inputs":   [{"path": "trace.csv", "kind": "zscan", "label": "s1"}],
      "options":  {"units": {"length": "mm", "time": "fs",
                              "fluence": "mJ/cm2", "beta": "cm/GW"},
                   "fit": {"max_iter": 200}, "seed": 0}
    }

Unit tags come from the closed set {mm, m} x {fs, s} x {mJ/cm2, J/m2}
x {cm/GW, m/W}; the defaults are the laboratory choices shown above.
Wavelengths (beam and Sellmeier resonances) are always nm, and the linear
absorption coefficient is always 1/m; neither has a tag dimension.
``"sellmeier": "diamond"`` selects the shipped diamond terms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

from .constants import DIAMOND_SELLMEIER
from .errors import ConfigError
from .fitting import FitOptions
from .optics import BeamSpec, MaterialSpec
from .traceio import KINDS

LENGTH_UNITS = {"mm": 1e-3, "m": 1.0}
TIME_UNITS = {"fs": 1e-15, "s": 1.0}
FLUENCE_UNITS = {"mJ/cm2": 10.0, "J/m2": 1.0}
BETA_UNITS = {"cm/GW": 1e-11, "m/W": 1.0}

UNIT_TABLES = {
    "length": LENGTH_UNITS,
    "time": TIME_UNITS,
    "fluence": FLUENCE_UNITS,
    "beta": BETA_UNITS,
}

DEFAULT_UNITS = {"length": "mm", "time": "fs", "fluence": "mJ/cm2", "beta": "cm/GW"}

_NM = 1e-9


@dataclass(frozen=True)
class InputSpec:
    path: Path
    kind: str
    label: str


@dataclass(frozen=True)
class UnitTags:
    """Selected laboratory units for the config boundary."""

    length: str = "mm"
    time: str = "fs"
    fluence: str = "mJ/cm2"
    beta: str = "cm/GW"

    def __post_init__(self) -> None:
        for f in fields(self):
            tag = getattr(self, f.name)
            if tag not in UNIT_TABLES[f.name]:
                raise ConfigError(
                    f"unknown {f.name} unit {tag!r}; expected one of "
                    f"{sorted(UNIT_TABLES[f.name])}"
                )

    def to_si(self, quantity: str, value: float) -> float:
        return value * UNIT_TABLES[quantity][getattr(self, quantity)]

    def from_si(self, quantity: str, value: float) -> float:
        return value / UNIT_TABLES[quantity][getattr(self, quantity)]

    def as_dict(self) -> dict[str, str]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class AnalysisConfig:
    """Validated configuration with all quantities in SI."""

    material: MaterialSpec
    beam: BeamSpec
    inputs: tuple[InputSpec, ...]
    units: UnitTags
    fit_options: FitOptions
    seed: int
    raw: dict[str, Any]


def _require_number(mapping: dict, key: str, where: str) -> float:
    if key not in mapping:
        raise ConfigError(f"{where}: missing required field {key!r}")
    value = mapping[key]
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{where}.{key}: expected a number, got {value!r}")
    return float(value)


def _optional_number(mapping: dict, key: str, where: str) -> float | None:
    if mapping.get(key) is None:
        return None
    return _require_number(mapping, key, where)


def _parse_sellmeier(raw: Any) -> tuple[tuple[float, float], ...]:
    if raw is None:
        return ()
    if raw == "diamond":
        return DIAMOND_SELLMEIER
    try:
        terms = tuple((float(b), float(lam_nm) * _NM) for b, lam_nm in raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"material.sellmeier: expected [[B, lambda_nm], ...]: {exc}") from None
    return terms


def parse_config(raw: dict[str, Any], base_dir: Path | str = ".") -> AnalysisConfig:
    """Validate a config dict, convert lab units to SI, resolve input paths."""
    if not isinstance(raw, dict):
        raise ConfigError("config document must be a JSON object")
    base = Path(base_dir)
    options = raw.get("options") or {}
    units = UnitTags(**{**DEFAULT_UNITS, **(options.get("units") or {})})

    mat_raw = raw.get("material") or {}
    beam_raw = raw.get("beam") or {}
    try:
        beam = BeamSpec(
            wavelength=_require_number(beam_raw, "wavelength", "beam") * _NM,
            na=_optional_number(beam_raw, "na", "beam"),
            waist=(None if beam_raw.get("waist") is None
                   else units.to_si("length", _require_number(beam_raw, "waist", "beam"))),
            pulse_fwhm=units.to_si("time", _require_number(beam_raw, "pulse_fwhm", "beam")),
            fluence=units.to_si("fluence", _require_number(beam_raw, "fluence", "beam")),
            profile=beam_raw.get("profile", "flat-top"),
        )
        material = MaterialSpec(
            n0=_require_number(mat_raw, "n0", "material"),
            alpha=_require_number(mat_raw, "alpha", "material"),
            length=units.to_si("length", _require_number(mat_raw, "length", "material")),
            sellmeier=_parse_sellmeier(mat_raw.get("sellmeier")),
            m_star_ratio=float(mat_raw.get("m_star_ratio", 0.57)),
            label=str(mat_raw.get("label", "")),
            reference_wavelength=beam.wavelength,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    inputs = []
    seen_paths = set()
    for i, entry in enumerate(raw.get("inputs") or []):
        where = f"inputs[{i}]"
        if not isinstance(entry, dict) or "path" not in entry:
            raise ConfigError(f"{where}: expected an object with a 'path' field")
        kind = entry.get("kind")
        if kind not in KINDS:
            raise ConfigError(f"{where}.kind: expected one of {KINDS}, got {kind!r}")
        path = base / str(entry["path"])
        if str(path) in seen_paths:
            raise ConfigError(f"{where}.path: duplicate input path {entry['path']!r}")
        seen_paths.add(str(path))
        label = str(entry.get("label") or Path(str(entry["path"])).stem)
        inputs.append(InputSpec(path=path, kind=kind, label=label))

    fit_raw = options.get("fit") or {}
    known = {f.name for f in fields(FitOptions)}
    unknown = set(fit_raw) - known
    if unknown:
        raise ConfigError(f"options.fit: unknown fields {sorted(unknown)}")
    fit_options = FitOptions(**fit_raw)

    seed = options.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError(f"options.seed: expected a non-negative integer, got {seed!r}")

    return AnalysisConfig(
        material=material,
        beam=beam,
        inputs=tuple(inputs),
        units=units,
        fit_options=fit_options,
        seed=seed,
        raw=raw,
    )


def load_config(path: Path | str) -> AnalysisConfig:
    """Read and validate a JSON config file; inputs resolve relative to it."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return parse_config(raw, base_dir=path.parent)


def lab_view(config: AnalysisConfig) -> dict[str, Any]:
    """Echo the SI values back in the configured laboratory units."""
    units = config.units
    material = config.material
    beam = config.beam
    return {
        "units": units.as_dict(),
        "material": {
            "n0": material.n0,
            "alpha_per_m": material.alpha,
            "length": units.from_si("length", material.length),
            "sellmeier_nm": [[b, lam / _NM] for b, lam in material.sellmeier],
            "m_star_ratio": material.m_star_ratio,
            "label": material.label,
        },
        "beam": {
            "wavelength_nm": beam.wavelength / _NM,
            "na": beam.na,
            "waist": None if beam.waist is None else units.from_si("length", beam.waist),
            "pulse_fwhm": units.from_si("time", beam.pulse_fwhm),
            "fluence": units.from_si("fluence", beam.fluence),
            "profile": beam.profile,
        },
    }
