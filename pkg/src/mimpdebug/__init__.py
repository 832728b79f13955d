"""Formula-based fault localization for MiniImp programs."""

from .driver import DebugSession, FaultReport, merge_reports, prepare_program, run_session

__all__ = [
    "DebugSession",
    "FaultReport",
    "merge_reports",
    "prepare_program",
    "run_session",
]

__version__ = "0.1.0"
