"""Lattice, Metropolis dynamics, observables and cluster analysis for the 2D clock model."""
