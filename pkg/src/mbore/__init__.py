"""Multi-objective Bayesian optimisation by density-ratio estimation."""

__version__ = "0.1.0"
