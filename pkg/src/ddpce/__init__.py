"""Data-driven polynomial chaos surrogates, ensembles and heat-sink optimisation."""

__version__ = "0.1.0"
