"""Eigenvalue asymptotics for banded and smooth Toeplitz matrices with simple-loop symbols."""

__version__ = "0.1.0"
