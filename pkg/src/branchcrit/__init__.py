"""Modular branching criterion for GL_n, lowering operators, and a brute-force module oracle."""

__version__ = "0.1.0"
