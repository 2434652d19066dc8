"""Floquet isospectrality of discrete periodic Schrödinger operators."""
__version__ = "1.0.0"
