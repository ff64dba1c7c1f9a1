"""Numerical laboratory for adjointable operators on Hilbert C*-modules."""
__version__ = "0.1.0"
