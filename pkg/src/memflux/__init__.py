"""Lumped simulator of variable-flux memory motors with hybrid LCF/HCF magnets."""

from .material import MagnetSpec, MagnetState, MajorLoop, mu_0, preset

__all__ = ["MagnetSpec", "MagnetState", "MajorLoop", "mu_0", "preset"]
