"""Render report figures to files (Agg backend, no display needed)."""

from __future__ import annotations

from pathlib import Path
from typing import Any

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .report import _fit_curve, _sanitize

_AXIS_LABELS = {
    "zscan": ("z (mm)", "normalized transmittance", 1e3),
    "pumpprobe": ("delay (fs)", r"$\Delta R/R$", 1e15),
    "fluence": (r"peak intensity (W/m$^2$)", r"$|\Delta R/R|$", 1.0),
}


def render_sample_figure(sample: dict[str, Any], out_dir: Path | str) -> Path:
    """Plot one sample's data and fitted curve; returns the PNG path."""
    xlabel, ylabel, xscale = _AXIS_LABELS[sample["kind"]]
    xs = [v * xscale for v in sample["data"]["abscissa"]]
    ys = sample["data"]["ordinate"]
    grid, curve = _fit_curve(sample)

    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(xs, ys, "o", ms=4, mfc="none", color="#1f77b4", label="data")
    ax.plot(grid * xscale, curve, "-", color="black", lw=1.2, label="fit")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(sample["label"])
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    path = Path(out_dir) / f"{_sanitize(sample['label'])}_{sample['kind']}.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_report_figures(report: dict[str, Any], out_dir: Path | str) -> list[Path]:
    """One PNG per sample, written next to the TSV plot data."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [render_sample_figure(sample, out) for sample in report["samples"]]
