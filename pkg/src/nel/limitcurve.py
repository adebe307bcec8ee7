"""The smooth limit of the scaled separatrices and its exact structure.

As the scaling frequency grows, the scaled eigencurves z(t) converge to a
smooth curve Z(t) on [0, 1] satisfying

    Z Z' + t + Z' sqrt(Z^2 - t^2) = 0,   Z(1) = 1,

whose homogeneous-type first integral, with G = Z/t, is

    (1 + 3G^2) (G + sqrt(G^2-1)) (sqrt(G^2-1) - 2G) / (sqrt(G^2-1) + 2G)
        = -4 / t^3.

Both routes are implemented: direct integration (after a substitution that
removes the square-root singularity at t = 1) and pointwise root-solving of
the first integral.  Z(0) = 2^(1/3) exactly, which fixes the intercept
growth constant sqrt(2) * Z(0) = 2^(5/6).

The module also carries the random-walk coefficient table alpha_{n,k} that
sums the oscillatory moments behind this limit (verified in exact rational
arithmetic against its closed forms) and a consistency check of the finite
frequency energy balance

    z(t)^2 - z(0)^2 + t^2/2 + eta(t) = O(1/lambda),
    eta(t) = integral_0^t s cos(2 lambda s z(s)) ds,

against the closed form eta(t) = integral_0^t z z' (sqrt(1 - s^2/z^2) - 1) ds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np

from .cosine import scaling_lambda
from .ode import IntegratorConfig, integrate
from .separatrix import SeparatrixConfig, scaled_separatrix_evaluator

__all__ = [
    "CUBE_ROOT_2",
    "GROWTH_CONSTANT",
    "LimitCurve",
    "AlphaTable",
    "DomainViolation",
    "RootNotBracketed",
    "ParityMismatch",
    "QuadratureFailure",
    "EtaCheck",
    "solve_limit_ode",
    "implicit_Z",
    "implicit_curve",
    "alpha_recursion",
    "alpha_closed_form",
    "eta_consistency_check",
    "eta_balance_envelope",
    "compute_A",
]

CUBE_ROOT_2 = 2.0 ** (1.0 / 3.0)
GROWTH_CONSTANT = 2.0 ** (5.0 / 6.0)
_K_CONST = -4.0     # fixed by G(1) = 1


class DomainViolation(ArithmeticError):
    """Z^2 < t^2 encountered while integrating (indicates a bug)."""


class RootNotBracketed(RuntimeError):
    """Implicit-solution bracket failed (should not occur on (0, 1])."""


class ParityMismatch(ValueError):
    """alpha_{n,k} closed forms exist only for n, k of equal parity."""


class QuadratureFailure(RuntimeError):
    """Oscillatory quadrature could not be set up."""


@dataclass(frozen=True)
class LimitCurve:
    ts: tuple[float, ...]
    zs: tuple[float, ...]
    source: str                 # "ode" or "implicit"


def _limit_rhs_v(v: float, w: float) -> float:
    # v = sqrt(1-t), W = Z - t: removes the (1-t)^(3/2) singularity at t=1.
    t = 1.0 - v * v
    if w < -1e-13:
        raise DomainViolation(f"Z-t = {w} < 0 at v={v}")
    z = w + t
    arg = w * (w + 2.0 * t)
    if arg < 0.0:
        arg = 0.0
    return 2.0 * v * (1.0 + t / (z + math.sqrt(arg)))


@lru_cache(maxsize=8)
def _ode_curve_cached(rel_tol: float, abs_tol: float):
    cfg = IntegratorConfig(rel_tol=rel_tol, abs_tol=abs_tol, max_steps=200_000)
    return integrate(_limit_rhs_v, 0.0, 0.0, 1.0, cfg)


def solve_limit_ode(grid_size: int = 1001,
                    cfg: IntegratorConfig | None = None) -> LimitCurve:
    """Integrate the limit-curve equation from t = 1 back to t = 0.

    Returns Z sampled on a uniform t grid; Z(1) = 1 is exact, Z'(1) = -1,
    and Z(0) comes out as 2^(1/3) to within the integration tolerance.
    """
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    if cfg is None:
        traj = _ode_curve_cached(1e-12, 1e-14)
    else:
        traj = integrate(_limit_rhs_v, 0.0, 0.0, 1.0, cfg)
    ts, zs = [], []
    for i in range(grid_size):
        t = i / (grid_size - 1)
        v = math.sqrt(1.0 - t)
        w = traj(v) if v > 0 else 0.0
        ts.append(t)
        zs.append(w + t)
    return LimitCurve(tuple(ts), tuple(zs), "ode")


def _implicit_lhs(g: float) -> float:
    s = math.sqrt(max(g * g - 1.0, 0.0))
    return (1.0 + 3.0 * g * g) * (g + s) * (s - 2.0 * g) / (s + 2.0 * g)


def implicit_Z(t: float) -> float:
    """Z(t) from the first integral, solved for G = Z/t on [1, inf).

    At t = 0 the analytic limit 2^(1/3) is returned (G grows like
    2^(1/3)/t, forced by the -4/t^3 right side).
    """
    if t < 0 or t > 1:
        raise ValueError("t must lie in [0, 1]")
    if t == 0.0:
        return CUBE_ROOT_2
    if t == 1.0:
        return 1.0
    target = _K_CONST / t ** 3
    lo, hi = 1.0, 1.0 + 4.0 / t
    flo = _implicit_lhs(lo) - target
    fhi = _implicit_lhs(hi) - target
    if flo * fhi > 0:
        raise RootNotBracketed(f"no sign change for t={t}")
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        fm = _implicit_lhs(mid) - target
        if fm == 0.0:
            lo = hi = mid
            break
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= 1e-16 * hi:
            break
    g = 0.5 * (lo + hi)
    return t * g


def implicit_curve(grid_size: int = 1001) -> LimitCurve:
    ts = tuple(i / (grid_size - 1) for i in range(grid_size))
    return LimitCurve(ts, tuple(implicit_Z(t) for t in ts), "implicit")


def compute_A() -> float:
    """Growth constant sqrt(2) * Z(0) of the separatrix intercepts."""
    a = math.sqrt(2.0) * implicit_Z(0.0)
    if abs(a - GROWTH_CONSTANT) > 1e-12:
        raise AssertionError(f"growth constant mismatch: {a}")
    return a


# -- random-walk coefficient table -----------------------------------------


@dataclass(frozen=True)
class AlphaTable:
    """Exact rational alpha_{n,k} for 1 <= n <= n_max, 0 <= k <= k_max.

    Walkers start at n = 2, hop left/right with amplitude -1/2 per k step
    and freeze at n = 1; entries with mixed-parity subscripts vanish, as
    does everything with n > k + 2.
    """

    n_max: int
    k_max: int
    _rows: tuple[tuple[Fraction, ...], ...]   # _rows[k][n-1]

    def value(self, n: int, k: int) -> Fraction:
        if n < 1 or k < 0:
            raise ValueError("need n >= 1 and k >= 0")
        if n > self.n_max or k > self.k_max:
            raise ValueError("outside the computed table")
        return self._rows[k][n - 1]

    def column(self, k: int) -> tuple[Fraction, ...]:
        return self._rows[k]


def alpha_recursion(n_max: int, k_max: int) -> AlphaTable:
    """Fill the table from the hop rules.

    alpha_{1,k} = -alpha_{2,k-1}/2, alpha_{2,k} = -alpha_{3,k-1}/2 (the
    frozen walkers at n=1 never hop back), alpha_{n,k} =
    -(alpha_{n-1,k-1} + alpha_{n+1,k-1})/2 for n >= 3; start
    alpha_{n,0} = [n == 2].
    """
    if n_max < 2 or k_max < 0:
        raise ValueError("need n_max >= 2, k_max >= 0")
    width = max(n_max, k_max + 3) + 2   # support is n <= k + 2
    zero = Fraction(0)
    half = Fraction(1, 2)
    prev = [zero] * (width + 2)
    prev[2] = Fraction(1)
    rows = [tuple(prev[1:n_max + 1])]
    for _ in range(k_max):
        cur = [zero] * (width + 2)
        cur[1] = -half * prev[2]
        cur[2] = -half * prev[3]
        for n in range(3, width + 1):
            cur[n] = -half * (prev[n - 1] + prev[n + 1])
        rows.append(tuple(cur[1:n_max + 1]))
        prev = cur
    return AlphaTable(n_max, k_max, tuple(rows))


def alpha_closed_form(n: int, k: int) -> Fraction:
    """Closed-form alpha_{n,k}; exact and equal to the recursion entry.

    For n >= 2 (n, k of equal parity):

        alpha_{n,k} = (-1)^n (n-1) k! / (2^k ((k+n)/2)! ((k-n)/2 + 1)!),

    zero when (k-n)/2 + 1 < 0.  For n = 1, k = 2p+1:

        alpha_{1,2p+1} = -(2p)! / (2^(2p+1) p! (p+1)!).
    """
    if n < 1 or k < 0:
        raise ValueError("need n >= 1 and k >= 0")
    if (n - k) % 2 != 0:
        raise ParityMismatch(f"n={n}, k={k} have mixed parity")
    if n == 1:
        p = (k - 1) // 2
        return -Fraction(factorial(2 * p), 2 ** (2 * p + 1) * factorial(p) * factorial(p + 1))
    j = (k - n) // 2 + 1
    if j < 0:
        return Fraction(0)
    sign = 1 if n % 2 == 0 else -1
    return Fraction(sign * (n - 1) * factorial(k),
                    2 ** k * factorial((k + n) // 2) * factorial(j))


# -- oscillatory consistency check -----------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _oscillatory_quad(fn, a: float, b: float, panel: float) -> float:
    """Composite 16-point Gauss quadrature with the given panel width."""
    if b <= a:
        return 0.0
    n_panels = max(1, math.ceil((b - a) / panel))
    if n_panels > 2_000_000:
        raise QuadratureFailure(f"{n_panels} panels requested")
    edges = np.linspace(a, b, n_panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        total += half * sum(w * fn(mid + half * x)
                            for x, w in zip(_GL_NODES, _GL_WEIGHTS))
    return total


@dataclass(frozen=True)
class EtaCheck:
    residual_balance: float    # |z(t)^2 - z(0)^2 + t^2/2 + eta_direct|
    mismatch_closed: float     # |eta_direct - eta_closed|
    eta_direct: float
    eta_closed: float


def eta_consistency_check(n_index: int, t: float,
                          cfg: SeparatrixConfig | None = None) -> EtaCheck:
    """Evaluate both eta routes on the n-th scaled separatrix at time t.

    The direct route integrates s*cos(2 lambda s z(s)) with panels sized to
    the fastest phase; the closed route integrates z z'(sqrt(1-s^2/z^2)-1).
    The energy-balance residual is O(1/lambda): it halves (roughly) when
    the index doubles.
    """
    if not 0 < t <= 1:
        raise ValueError("t must lie in (0, 1]")
    z, t_max, _ = scaled_separatrix_evaluator(n_index, cfg)
    lam = scaling_lambda(n_index)
    z_max = max(z(t * k / 32) for k in range(33))
    panel = math.pi / (lam * (z_max + t))   # >= 16 points per oscillation

    eta_direct = _oscillatory_quad(
        lambda s: s * math.cos(2.0 * lam * s * z(s)), 0.0, t, panel)

    def closed_integrand(s: float) -> float:
        zs = z(s)
        zp = math.cos(lam * s * zs)
        arg = zs * zs - s * s
        if arg < 0:
            raise QuadratureFailure(f"z(s) < s at s={s}")
        return zp * (math.sqrt(arg) - zs)

    eta_closed = _oscillatory_quad(closed_integrand, 0.0, t, panel)

    residual = abs(z(t) ** 2 - z(0.0) ** 2 + 0.5 * t * t + eta_direct)
    return EtaCheck(residual, abs(eta_direct - eta_closed), eta_direct, eta_closed)


def eta_balance_envelope(n_index: int, t: float,
                         cfg: SeparatrixConfig | None = None, *,
                         half_width: float = 0.02, samples: int = 13) -> float:
    """Phase-robust size of the energy-balance residual near t.

    The pointwise residual oscillates with the solution, so its value at a
    single t samples an arbitrary phase (it can even pass through zero).
    The max over a window a few oscillation periods wide measures the
    O(1/lambda) envelope instead, which halves cleanly when n doubles.
    """
    if samples < 3:
        raise ValueError("samples must be >= 3")
    lo = max(1e-6, t - half_width)
    hi = min(1.0, t + half_width)
    return max(eta_consistency_check(n_index, lo + (hi - lo) * k / (samples - 1), cfg)
               .residual_balance for k in range(samples))
