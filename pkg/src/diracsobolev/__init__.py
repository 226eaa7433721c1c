"""Numerical laboratory for Dirac-operator seminorms and Sobolev-type inequalities."""

__version__ = "0.1.0"
