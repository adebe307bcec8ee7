"""Square-wave Fourier sine sections: the classical model of oscillatory,
non-uniform convergence that the scaled eigencurves mimic.

S_{2N+1}(x) = (4/pi) sum_{n=0}^{N} sin((2n+1)x)/(2n+1) converges to 1 on
(0, pi) while its overshoot near the endpoints tends to (2/pi) Si(pi).
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["fourier_partial_sum", "first_peak_location", "gibbs_overshoot",
           "GIBBS_LIMIT"]

# (2/pi) Si(pi), the overshoot limit
GIBBS_LIMIT = 1.1789797444721675


def fourier_partial_sum(n_terms: int, xs) -> np.ndarray:
    """S_{2N+1} sampled on xs for N = n_terms."""
    if n_terms < 0:
        raise ValueError("n_terms must be >= 0")
    x = np.asarray(xs, dtype=float)
    odd = 2 * np.arange(n_terms + 1) + 1
    return (4.0 / math.pi) * np.sin(np.outer(x, odd)).dot(1.0 / odd)


def first_peak_location(n_terms: int) -> float:
    """The derivative (2/pi) sin(2(N+1)x)/sin(x) first vanishes at
    pi / (2N + 2), which is where the global maximum (the overshoot) sits."""
    return math.pi / (2 * n_terms + 2)


def gibbs_overshoot(n_terms: int) -> float:
    """Value of the section at its first peak."""
    return float(fourier_partial_sum(n_terms, [first_peak_location(n_terms)])[0])
