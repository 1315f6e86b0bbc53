"""Script DSL and the ``grsym`` command-line entry point."""

from .session import Report, Record, Session, emit, run_script

__all__ = ["Report", "Record", "Session", "emit", "run_script"]
