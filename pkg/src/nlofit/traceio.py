"""CSV ingestion and re-serialization for measurement traces.

Formats (first non-comment line is the header, matched exactly):

* Z-scan:      ``z_mm,T``             -> :class:`~nlofit.zscan.ZscanTrace`
* pump-probe:  ``delay_fs,dRoverR``   -> :class:`~nlofit.pumpprobe.PumpProbeTrace`
* fluence:     ``intensity,abs_dRoverR`` plus a ``# units:`` comment line
  selecting ``mJ/cm2`` (fluence) or ``W/m2`` (intensity)
               -> :class:`~nlofit.pumpprobe.FluenceSeries`

Blank lines and ``#`` comments are skipped. Values land in SI on ingestion;
an ``mJ/cm2`` abscissa becomes J/m^2 and is flagged in the series metadata
as a fluence that still needs the pulse-duration conversion to W/m^2.
"""

from __future__ import annotations

import math
from typing import IO, Any, Iterable

from .errors import TraceFormatError
from .pumpprobe import FluenceSeries, PumpProbeTrace
from .zscan import ZscanTrace

KINDS = ("zscan", "pumpprobe", "fluence")

_HEADERS = {
    "zscan": "z_mm,T",
    "pumpprobe": "delay_fs,dRoverR",
    "fluence": "intensity,abs_dRoverR",
}
_ABSCISSA_SCALE = {"zscan": 1e-3, "pumpprobe": 1e-15}
_FLUENCE_UNITS = {"mJ/cm2": (10.0, "fluence"), "W/m2": (1.0, "intensity")}


def _parse_rows(lines: Iterable[str], kind: str) -> tuple[list[float], list[float], str | None]:
    header = _HEADERS[kind]
    units_tag: str | None = None
    xs: list[float] = []
    ys: list[float] = []
    saw_header = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.lower().startswith("units:"):
                units_tag = body[len("units:"):].strip()
            continue
        if not saw_header:
            if line != header:
                raise TraceFormatError(
                    f"line {lineno}: expected header {header!r}, got {line!r}"
                )
            saw_header = True
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise TraceFormatError(f"line {lineno}: expected 2 comma-separated values")
        try:
            x = float(fields[0])
            y = float(fields[1])
        except ValueError as exc:
            raise TraceFormatError(f"line {lineno}: {exc}") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise TraceFormatError(f"line {lineno}: non-finite value")
        if xs and x <= xs[-1]:
            raise TraceFormatError(
                f"line {lineno}: abscissa {x} does not increase past {xs[-1]}"
            )
        xs.append(x)
        ys.append(y)
    if not saw_header:
        raise TraceFormatError(f"missing header line; expected {header!r}")
    return xs, ys, units_tag


def parse_trace_csv(stream: IO[str] | str, kind: str, meta: dict[str, Any] | None = None):
    """Parse a trace CSV of the given kind into its domain type.

    ``stream`` may be an open text file or the CSV content itself.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown trace kind {kind!r}, expected one of {KINDS}")
    lines = stream.splitlines() if isinstance(stream, str) else stream
    xs, ys, units_tag = _parse_rows(lines, kind)
    meta = dict(meta or {})
    if kind == "zscan":
        z = [x * _ABSCISSA_SCALE[kind] for x in xs]
        return ZscanTrace(z=z, transmittance=ys, meta=meta)
    if kind == "pumpprobe":
        delay = [x * _ABSCISSA_SCALE[kind] for x in xs]
        return PumpProbeTrace(delay=delay, dr_over_r=ys, meta=meta)
    if units_tag is None:
        raise TraceFormatError(
            "fluence files need a '# units: mJ/cm2' or '# units: W/m2' comment line"
        )
    if units_tag not in _FLUENCE_UNITS:
        raise TraceFormatError(
            f"unknown fluence units {units_tag!r}; expected 'mJ/cm2' or 'W/m2'"
        )
    factor, abscissa = _FLUENCE_UNITS[units_tag]
    meta["abscissa"] = abscissa
    return FluenceSeries(
        intensity=[x * factor for x in xs],
        abs_dr_over_r=ys,
        meta=meta,
    )


def _format_rows(xs, ys, header: str, comments: Iterable[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(header)
    lines.extend(f"{x:.17g},{y:.17g}" for x, y in zip(xs, ys))
    return "\n".join(lines) + "\n"


def zscan_trace_to_csv(trace: ZscanTrace, comments: Iterable[str] = ()) -> str:
    """Serialize a Z-scan trace in the documented z_mm,T format (lossless to
    well past 15 significant digits)."""
    return _format_rows(trace.z / 1e-3, trace.transmittance, _HEADERS["zscan"], comments)


def pump_probe_trace_to_csv(trace: PumpProbeTrace, comments: Iterable[str] = ()) -> str:
    """Serialize a pump-probe trace in the delay_fs,dRoverR format."""
    return _format_rows(trace.delay / 1e-15, trace.dr_over_r, _HEADERS["pumpprobe"], comments)


def fluence_series_to_csv(series: FluenceSeries, units: str = "W/m2") -> str:
    """Serialize a fluence series; ``units`` selects the abscissa tag."""
    if units not in _FLUENCE_UNITS:
        raise ValueError(f"unknown fluence units {units!r}")
    factor, _ = _FLUENCE_UNITS[units]
    return _format_rows(
        series.intensity / factor,
        series.abs_dr_over_r,
        _HEADERS["fluence"],
        comments=[f"units: {units}"],
    )
