"""Exact boundary transfer matrices and reflection equations for U_q(sl2) and its affinization."""

__version__ = "0.1.0"
