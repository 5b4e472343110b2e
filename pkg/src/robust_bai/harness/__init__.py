"""Experiment engine, tables and command-line interface."""

from .config import ConfigError, ExperimentConfig, build_source, load_config, parse_config_text
from .engine import (
    ErrorRateReport,
    ErrorRateRow,
    TheoryBounds,
    bound_for,
    estimate_error,
    monte_carlo,
    run_episode,
    theoretical_bounds,
    wilson_interval,
)
from .report import PUBLISHED, csv_text, emit_csv, table1

__all__ = [
    "PUBLISHED", "ConfigError", "ErrorRateReport", "ErrorRateRow", "ExperimentConfig", "TheoryBounds",
    "bound_for", "build_source", "csv_text", "emit_csv", "estimate_error", "load_config", "monte_carlo",
    "parse_config_text", "run_episode", "table1", "theoretical_bounds", "wilson_interval",
]
