"""Numerical counterexample machinery for limit Brody curves."""

__version__ = "0.1.0"
