"""Exact series, critical data and samplers for Ising-weighted random triangulations."""

__version__ = "0.1.0"
