"""
Exception types shared by the simulator, the analysis layer and the CLI.

The CLI maps them onto exit codes:
  • ConfigError      → 2 (bad parameters, bad fill spec, state space too large)
  • SimulationError  → 3 (bookkeeping audit failed mid-run)
"""

from __future__ import annotations


class ClockMemError(Exception):
    """Base class for all toolchain errors."""


class ConfigError(ClockMemError, ValueError):
    """Parameters or inputs that cannot describe a valid run."""


class SimulationError(ClockMemError, RuntimeError):
    """Incremental bookkeeping disagreed with a from-scratch recomputation."""
