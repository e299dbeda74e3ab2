"""Benchmark runner and report generation."""

from .report import budget_grid, compute_art, compute_ecdf, emit_report, read_runs
from .runner import RunRecord, TargetSpec, load_config, run_suite, validate_config
