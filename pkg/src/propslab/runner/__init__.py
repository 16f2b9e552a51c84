"""Experiment orchestration: configs, trials, summaries and replay."""

from .config import ExperimentConfig, RowSpec, load_config, parse_config
from .experiment import ExperimentResult, MetricsRow, run_experiment, trial_seed
from .replay import ReplayReport, replay
from .report import Summary, compute_metrics, format_table, summarize

__all__ = [
    "ExperimentConfig", "ExperimentResult", "MetricsRow", "ReplayReport", "RowSpec", "Summary",
    "compute_metrics", "format_table", "load_config", "parse_config", "replay", "run_experiment",
    "summarize", "trial_seed",
]
