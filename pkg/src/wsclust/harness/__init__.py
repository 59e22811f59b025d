"""Experiment sweeps, CSV records, SVG plots and the command line."""

from .config import ALGORITHMS, SweepSpec, load_config, parse_config
from .plot import emit_plot, render_svg
from .records import ExperimentRecord, read_records, records_to_csv, write_records
from .sweep import CellSummary, SweepResult, run_sweep, run_task

__all__ = ["ALGORITHMS", "CellSummary", "ExperimentRecord", "SweepResult", "SweepSpec",
           "emit_plot", "load_config", "parse_config", "read_records", "records_to_csv",
           "render_svg", "run_sweep", "run_task", "write_records"]
