"""Sweeps, reports and the command line driver."""
from .report import (CheckReport, CheckRow, DeterminismError, ReportIOError, RunConfig,
                     emit_report)
from .sweep import SweepReport, classify, run_sweep

__all__ = ["CheckReport", "CheckRow", "DeterminismError", "ReportIOError", "RunConfig",
           "SweepReport", "classify", "emit_report", "run_sweep"]
