"""qae_lab - Quantum amplitude estimation on a statevector simulator."""

__version__ = "0.1.0"
