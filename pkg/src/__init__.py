"""Liouform - symplectic integrators derived from Liouvillian forms."""

__version__ = "0.1.0"
