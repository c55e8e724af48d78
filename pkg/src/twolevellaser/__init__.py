"""Two-level laser toolkit - closed-form steady-state and spectral results plus a stochastic simulator."""

__version__ = "0.1.0"
