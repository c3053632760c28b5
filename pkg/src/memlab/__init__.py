"""Modeling, simulation and count-analysis toolkit for warm-vapor EIT quantum memories."""

from .config import ConfigError, RunConfig, validate_config
from .counting import ArrivalHistogram, DetectionWindow, SequenceTiming, analyze, synthesize_histogram
from .fitting import Dataset, FitResult, fit_noise_energy, fit_total_noise, least_squares_fit
from .mbsim import ControlPulse, Grid, MediumParams, SignalEnvelope, simulate_retrieval, simulate_storage
from .models import Calibration, EfficiencyParams, MetricsReport, NoiseParams
from .report import emit_report
from .sweep import run_sweep
from .voigt import voigt_unit_peak

__version__ = "0.1.0"

__all__ = [
    "ArrivalHistogram", "Calibration", "ConfigError", "ControlPulse", "Dataset", "DetectionWindow",
    "EfficiencyParams", "FitResult", "Grid", "MediumParams", "MetricsReport", "NoiseParams", "RunConfig",
    "SequenceTiming", "SignalEnvelope", "analyze", "emit_report", "fit_noise_energy", "fit_total_noise",
    "least_squares_fit", "run_sweep", "simulate_retrieval", "simulate_storage", "synthesize_histogram",
    "validate_config", "voigt_unit_peak",
]
