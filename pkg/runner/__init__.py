"""Command-line entry point wiring experiments to reproducible outputs."""
