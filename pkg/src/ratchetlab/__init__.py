"""Diffusion ratchets: closed forms, simulation and verification."""
__version__ = "0.1.0"
