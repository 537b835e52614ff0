"""Experiment protocols built on the simulator: memory time, precession, island scans, exact oracle."""
