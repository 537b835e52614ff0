"""Shared schemas and utilities for the clock-model memory-time toolchain."""

__version__ = "0.1.0"
