"""nlofit: nonlinear-optical coefficient extraction from closed-aperture
Z-scan traces and pump-probe transient-reflectivity data.

Library layout:

* :mod:`nlofit.optics`    - beam geometry, dispersion, coefficient conversions
* :mod:`nlofit.fitting`   - damped Gauss-Newton least squares with sigmas
* :mod:`nlofit.zscan`     - transmittance model, simulation, trace fitting
* :mod:`nlofit.pumpprobe` - transient peak and fluence-series analysis
* :mod:`nlofit.traceio`   - CSV trace ingestion / serialization
* :mod:`nlofit.config`    - lab-unit config boundary
* :mod:`nlofit.report`    - pipeline orchestration and the JSON report
* :mod:`nlofit.cli`       - command-line interface
"""

__version__ = "0.1.0"

from .constants import CODATA, DIAMOND_SELLMEIER, PhysicalConstants
from .optics import BeamSpec, MaterialSpec
from .fitting import FitOptions, FitProblem, FitResult, fit_least_squares
from .zscan import ZscanFitResult, ZscanParams, ZscanTrace
from .pumpprobe import FluenceFitResult, FluenceSeries, PeakFit, PumpProbeTrace
from .config import AnalysisConfig, load_config, parse_config
from .report import REPORT_SCHEMA, emit_plot_data, run_analysis

__all__ = [
    "__version__",
    "CODATA",
    "DIAMOND_SELLMEIER",
    "PhysicalConstants",
    "BeamSpec",
    "MaterialSpec",
    "FitOptions",
    "FitProblem",
    "FitResult",
    "fit_least_squares",
    "ZscanFitResult",
    "ZscanParams",
    "ZscanTrace",
    "FluenceFitResult",
    "FluenceSeries",
    "PeakFit",
    "PumpProbeTrace",
    "AnalysisConfig",
    "load_config",
    "parse_config",
    "REPORT_SCHEMA",
    "emit_plot_data",
    "run_analysis",
]
