"""SIAC filtering toolkit: DG advection solver, filter construction, post-processing."""

__version__ = "0.1.0"
