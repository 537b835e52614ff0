"""Power-law fitting, growth diagnostics and time-scale conversion."""
