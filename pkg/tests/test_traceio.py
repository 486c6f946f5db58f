import numpy as np
import pytest

from nlofit.errors import TraceFormatError
from nlofit.pumpprobe import FluenceSeries, PumpProbeTrace
from nlofit.traceio import (
    fluence_series_to_csv,
    parse_trace_csv,
    pump_probe_trace_to_csv,
    zscan_trace_to_csv,
)
from nlofit.zscan import ZscanTrace

ZSCAN_CSV = "z_mm,T\n" + "\n".join(
    f"{z:.3f},{1.0 + 0.01 * i}" for i, z in enumerate(np.linspace(-1.0, 1.0, 40))
)


class TestParseZscan:
    def test_well_formed(self):
        trace = parse_trace_csv(ZSCAN_CSV, "zscan")
        assert isinstance(trace, ZscanTrace)
        assert trace.z.size == 40
        assert trace.z[0] == pytest.approx(-1e-3)
        assert trace.z[-1] == pytest.approx(1e-3)

    def test_header_mismatch(self):
        with pytest.raises(TraceFormatError, match="z_mm,T"):
            parse_trace_csv(ZSCAN_CSV.replace("z_mm,T", "z,T"), "zscan")

    def test_missing_header(self):
        with pytest.raises(TraceFormatError, match="header"):
            parse_trace_csv("", "zscan")

    def test_comments_and_blank_lines_skipped(self):
        text = "# a comment\n\n" + ZSCAN_CSV.replace("z_mm,T", "z_mm,T\n# mid comment\n")
        trace = parse_trace_csv(text, "zscan")
        assert trace.z.size == 40

    def test_non_monotone_rows(self):
        text = "z_mm,T\n" + "\n".join(f"{z},1.0" for z in [*range(11), 5])
        with pytest.raises(TraceFormatError, match="line 13"):
            parse_trace_csv(text, "zscan")

    def test_non_finite_value(self):
        text = "z_mm,T\n" + "\n".join(f"{z},1.0" for z in range(11)) + "\n11,nan"
        with pytest.raises(TraceFormatError, match="line 13"):
            parse_trace_csv(text, "zscan")

    def test_unparseable_value(self):
        text = "z_mm,T\n0,1.0\n1,oops"
        with pytest.raises(TraceFormatError, match="line 3"):
            parse_trace_csv(text, "zscan")

    def test_wrong_column_count(self):
        text = "z_mm,T\n0,1.0,9"
        with pytest.raises(TraceFormatError, match="2 comma-separated"):
            parse_trace_csv(text, "zscan")

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="kind"):
            parse_trace_csv(ZSCAN_CSV, "open-aperture")


class TestParsePumpProbe:
    def test_well_formed(self):
        text = "delay_fs,dRoverR\n" + "\n".join(
            f"{t},{-1e-4}" for t in np.linspace(-200, 200, 15))
        trace = parse_trace_csv(text, "pumpprobe")
        assert isinstance(trace, PumpProbeTrace)
        assert trace.delay[0] == pytest.approx(-200e-15)

    def test_duplicate_delays(self):
        rows = [f"{t},0.0" for t in range(12)]
        rows.insert(5, "4,0.0")  # duplicates the preceding abscissa
        text = "delay_fs,dRoverR\n" + "\n".join(rows)
        with pytest.raises(TraceFormatError, match="line 7"):
            parse_trace_csv(text, "pumpprobe")


class TestParseFluence:
    def test_intensity_units(self):
        text = "# units: W/m2\nintensity,abs_dRoverR\n1e15,1e-4\n2e15,2e-4\n3e15,3.2e-4"
        series = parse_trace_csv(text, "fluence")
        assert isinstance(series, FluenceSeries)
        assert series.meta["abscissa"] == "intensity"
        assert series.intensity[0] == 1e15

    def test_fluence_units_converted_to_si(self):
        text = "# units: mJ/cm2\nintensity,abs_dRoverR\n10,1e-4\n20,2e-4\n30,3.2e-4"
        series = parse_trace_csv(text, "fluence")
        assert series.meta["abscissa"] == "fluence"
        assert series.intensity[0] == pytest.approx(100.0)  # J/m^2

    def test_missing_units_line(self):
        text = "intensity,abs_dRoverR\n1e15,1e-4\n2e15,2e-4\n3e15,3e-4"
        with pytest.raises(TraceFormatError, match="units"):
            parse_trace_csv(text, "fluence")

    def test_unknown_units(self):
        text = "# units: J/cm2\nintensity,abs_dRoverR\n1,1e-4\n2,2e-4\n3,3e-4"
        with pytest.raises(TraceFormatError, match="units"):
            parse_trace_csv(text, "fluence")


class TestRoundTrip:
    def test_zscan_lossless_to_15_digits(self):
        trace = parse_trace_csv(ZSCAN_CSV, "zscan")
        again = parse_trace_csv(zscan_trace_to_csv(trace), "zscan")
        assert np.allclose(again.z, trace.z, rtol=1e-15, atol=0)
        assert np.array_equal(again.transmittance, trace.transmittance)

    def test_pump_probe_round_trip(self):
        text = "delay_fs,dRoverR\n" + "\n".join(
            f"{t},{np.sin(t) * 1e-4}" for t in np.linspace(-200, 200, 21))
        trace = parse_trace_csv(text, "pumpprobe")
        again = parse_trace_csv(pump_probe_trace_to_csv(trace), "pumpprobe")
        assert np.allclose(again.delay, trace.delay, rtol=1e-15, atol=0)
        assert np.array_equal(again.dr_over_r, trace.dr_over_r)

    def test_fluence_round_trip(self):
        series = FluenceSeries(np.array([1e15, 2e15, 3e15]),
                               np.array([1e-4, 2.3e-4, 3.9e-4]),
                               meta={"abscissa": "intensity"})
        again = parse_trace_csv(fluence_series_to_csv(series), "fluence")
        assert np.array_equal(again.intensity, series.intensity)
        assert np.array_equal(again.abs_dr_over_r, series.abs_dr_over_r)
