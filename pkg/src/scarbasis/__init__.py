"""Scar-function basis sets for the chaotic coupled quartic oscillator.

The package computes eigenvalues and eigenfunctions of the two-dimensional
quartic oscillator H = p^2/2 + x^2 y^2/2 + (beta/4)(x^4 + y^4) from a small
basis of scar functions built over its shortest unstable periodic orbits,
selected with a selective Gram-Schmidt procedure, and validates the result
against an independent harmonic-oscillator-basis reference solver.
"""

from .classical import HamiltonianParams

__version__ = "0.1.0"
__all__ = ["HamiltonianParams", "__version__"]
