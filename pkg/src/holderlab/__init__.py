"""Numerical laboratory for generalized Hoelder and Morrey-Campanato Dirichlet problems
for elliptic systems in the upper half-space."""

__version__ = "0.1.0"
