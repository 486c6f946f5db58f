import json

import numpy as np
import pytest

from nlofit.constants import DIAMOND_SELLMEIER
from nlofit.optics import BeamSpec, MaterialSpec

# Fitted (dphi0, dpsi0, z0) rows used throughout: the measured parameter
# sets for the non-implanted and two implanted samples.
TABLE1_ROWS = [
    (0.39, 0.06, 0.22e-3),
    (0.53, 0.08, 0.22e-3),
    (0.52, 0.10, 0.20e-3),
]


@pytest.fixture
def diamond() -> MaterialSpec:
    return MaterialSpec(
        n0=2.4,
        alpha=10.0,
        length=3e-4,
        sellmeier=DIAMOND_SELLMEIER,
        m_star_ratio=0.57,
        label="diamond",
        reference_wavelength=800e-9,
    )


@pytest.fixture
def beam() -> BeamSpec:
    return BeamSpec(wavelength=800e-9, na=0.06, pulse_fwhm=50e-15, fluence=200.0)


def base_config_dict(inputs=()) -> dict:
    return {
        "material": {
            "n0": 2.4,
            "alpha": 10.0,
            "length": 0.3,
            "sellmeier": "diamond",
            "m_star_ratio": 0.57,
            "label": "diamond",
        },
        "beam": {
            "wavelength": 800.0,
            "na": 0.06,
            "pulse_fwhm": 50.0,
            "fluence": 20.0,
            "profile": "flat-top",
        },
        "inputs": list(inputs),
        "options": {"seed": 0},
    }


def write_config(tmp_path, inputs=(), name="config.json") -> str:
    path = tmp_path / name
    path.write_text(json.dumps(base_config_dict(inputs)), encoding="utf-8")
    return str(path)


def write_sample_inputs(tmp_path) -> list[dict]:
    """Write one synthetic trace of each kind; returns config input entries."""
    import math

    from nlofit.zscan import ZscanParams, simulate_zscan
    from nlofit.traceio import zscan_trace_to_csv

    trace = simulate_zscan(ZscanParams(0.39, 0.06, 0.22e-3),
                           np.linspace(-1e-3, 1e-3, 40))
    (tmp_path / "zs.csv").write_text(zscan_trace_to_csv(trace), encoding="utf-8")

    t_fs = np.linspace(-200.0, 200.0, 81)
    dr = -1e-4 * np.exp(-4.0 * math.log(2.0) * (t_fs / 70.0) ** 2)
    pp = "delay_fs,dRoverR\n" + "\n".join(
        f"{t:.17g},{v:.17g}" for t, v in zip(t_fs, dr)) + "\n"
    (tmp_path / "pp.csv").write_text(pp, encoding="utf-8")

    intensity = np.linspace(0.5e15, 4e15, 20)
    signal = 2.0336e-19 * intensity + 1.7930e-35 * intensity**2
    fl = "# units: W/m2\nintensity,abs_dRoverR\n" + "\n".join(
        f"{i:.17g},{v:.17g}" for i, v in zip(intensity, signal)) + "\n"
    (tmp_path / "fl.csv").write_text(fl, encoding="utf-8")

    return [
        {"path": "zs.csv", "kind": "zscan", "label": "sample a"},
        {"path": "pp.csv", "kind": "pumpprobe", "label": "sample b"},
        {"path": "fl.csv", "kind": "fluence", "label": "sample c"},
    ]


def brute_force_extrema(dphi0: float, dpsi0: float, n: int = 2_000_001):
    """Independent dense-grid search for the transmittance extrema on
    x in [-10, 10]; returns (x_peak, t_peak, x_valley, t_valley)."""
    x = np.linspace(-10.0, 10.0, n)
    x2 = x * x
    t = 1.0 + (4.0 * x * dphi0 - 2.0 * (x2 + 3.0) * dpsi0) / ((x2 + 9.0) * (x2 + 1.0))
    i_max = int(np.argmax(t))
    i_min = int(np.argmin(t))
    return x[i_max], t[i_max], x[i_min], t[i_min]
