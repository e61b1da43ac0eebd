"""Coherence-enhanced chiral Raman (CARS-ROA) spectra for model molecules."""

__version__ = "0.1.0"
