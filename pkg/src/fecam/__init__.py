"""Frequency-enhanced channel attention forecasting.

A small, self-contained stack: exact DCT/DFT spectral kernels, a
reverse-mode neural core, the frequency-enhanced channel attention layer,
dataset tooling, and a forecaster that composes the attention layer with a
single projection.
"""

__version__ = "0.1.0"
