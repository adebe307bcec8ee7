"""Numerical laboratory for separatrix eigenvalue problems of nonlinear ODEs.

The package computes, classifies and extrapolates the discrete initial
conditions ("eigenvalues") at which y'(x) = cos(pi*x*y) has a separatrix
solution, solves the scaled limiting-curve problem that identifies the
growth constant of those eigenvalues, integrates the first Painleve
transcendent through its double poles to extract the analogous eigenvalue
sequence, and computes max-modulus roots of partial sums of unit-radius
power series.
"""

__version__ = "0.1.0"

from . import (cosine, extrapolate, fourier, limitcurve, ode, painleve,
               pseries, separatrix)

__all__ = [
    "__version__",
    "cosine",
    "extrapolate",
    "fourier",
    "limitcurve",
    "ode",
    "painleve",
    "pseries",
    "separatrix",
]
