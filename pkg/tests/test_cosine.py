import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nel.cosine import (PI, AsymptoticTail, BundleMismatch, TailNotAsymptotic,
                        asymptotic_tail_eval, bundle_decay_fit,
                        bundle_index, rhs_scaled, rhs_unscaled, scaling_factor,
                        scaling_lambda, tail_is_asymptotic, taylor_coefficients,
                        taylor_eval)
from nel.ode import IntegratorConfig, integrate


def test_rhs_unscaled_values():
    for a in (-3.0, 0.0, 1.7, 42.0):
        assert rhs_unscaled(0.0, a) == 1.0
    assert rhs_unscaled(7.3, 0.0) == 1.0
    assert abs(rhs_unscaled(1.0, 0.5)) < 1e-15  # cos(pi/2)
    assert -1.0 <= rhs_unscaled(2.31, 1.113) <= 1.0


def test_rhs_scaled_values():
    assert rhs_scaled(0.0, 1.23, 17.0) == 1.0
    assert rhs_scaled(1.0, 1.0, math.pi) == pytest.approx(-1.0)


def test_scaled_unscaled_trajectories_coincide():
    # With lam = (2n-1/2) pi and x = s t, y = s z for s = sqrt(2n-1/2),
    # the two initial-value problems are the same curve.
    n, a = 3, 1.0
    s = scaling_factor(n)
    lam = scaling_lambda(n)
    assert lam == pytest.approx(s * s * math.pi)
    cfg = IntegratorConfig()
    x1 = 3.0
    ty = integrate(rhs_unscaled, 0.0, a, x1, cfg)
    tz = integrate(lambda t, z: rhs_scaled(t, z, lam), 0.0, a / s, x1 / s, cfg)
    for k in range(1, 11):
        x = x1 * k / 10
        assert abs(ty(x) - s * tz(x / s)) < 1e-9


# -- Taylor expansion ------------------------------------------------------


class PiPoly:
    """Exact element of Q[pi]: mapping power-of-pi -> Fraction."""

    def __init__(self, d=None):
        self.d = dict(d or {})

    @classmethod
    def const(cls, q):
        return cls({0: Fraction(q)})

    def __add__(self, o):
        d = dict(self.d)
        for k, v in o.d.items():
            d[k] = d.get(k, Fraction(0)) + v
        return PiPoly(d)

    def __mul__(self, o):
        d = {}
        for i, a in self.d.items():
            for j, b in o.d.items():
                d[i + j] = d.get(i + j, Fraction(0)) + a * b
        return PiPoly(d)

    def scale(self, q):
        return PiPoly({k: v * Fraction(q) for k, v in self.d.items()})

    def mul_pi(self):
        return PiPoly({k + 1: v for k, v in self.d.items()})

    def expect(self, terms):
        want = {k: Fraction(*v) if isinstance(v, tuple) else Fraction(v)
                for k, v in terms.items()}
        got = {k: v for k, v in self.d.items() if v != 0}
        return got == {k: v for k, v in want.items() if v != 0}


def exact_taylor(a: int, n_terms: int) -> list[PiPoly]:
    # Same recurrence as taylor_coefficients, replayed in Q[pi].
    b = [PiPoly.const(a)]
    cc = [PiPoly.const(1)]
    ss = [PiPoly.const(0)]
    for n in range(n_terms):
        b.append(cc[n].scale(Fraction(1, n + 1)))
        sc = PiPoly()
        sm = PiPoly()
        for j in range(n + 1):
            w = b[j].scale(j + 1).mul_pi()
            sc = sc + ss[n - j] * w
            sm = sm + cc[n - j] * w
        cc.append(sc.scale(Fraction(-1, n + 1)))
        ss.append(sm.scale(Fraction(1, n + 1)))
    return b


def test_taylor_exact_structure_a1():
    # Written-out coefficients through x^9 at a=1, exact in Q[pi].
    b = exact_taylor(1, 9)
    assert b[0].expect({0: 1})
    assert b[1].expect({0: 1})
    assert b[2].expect({})
    assert b[3].expect({2: (-1, 6)})
    assert b[4].expect({2: (-1, 4)})
    assert b[5].expect({4: (1, 120), 2: (-1, 10)})
    assert b[6].expect({4: (1, 18)})
    assert b[7].expect({6: (-1, 5040), 4: (2, 21)})
    assert b[8].expect({6: (-1, 180), 4: (31, 480)})
    assert b[9].expect({8: (1, 362880), 6: (-161, 6480), 4: (17, 1080)})


def test_taylor_exact_structure_a0():
    b = exact_taylor(0, 9)
    assert b[3].expect({})            # -pi^2 a^2/6 vanishes at a=0
    assert b[5].expect({2: (-1, 10)})
    assert b[9].expect({4: (17, 1080)})


def test_taylor_float_coefficients_match_formulas():
    for a in (-1.5, 0.0, 0.3, 1.0, 2.0):
        ts = taylor_coefficients(a, 9)
        b = ts.coefficients
        assert b[0] == a and b[1] == 1.0 and b[2] == 0.0
        assert b[3] == pytest.approx(-PI ** 2 * a ** 2 / 6, abs=1e-13)
        assert b[4] == pytest.approx(-PI ** 2 * a / 4, abs=1e-13)
        assert b[5] == pytest.approx(PI ** 4 * a ** 4 / 120 - PI ** 2 / 10, rel=1e-13, abs=1e-13)
        assert b[9] == pytest.approx(PI ** 8 * a ** 8 / 362880 - 161 * PI ** 6 * a ** 4 / 6480
                                     + 17 * PI ** 4 / 1080, rel=1e-12, abs=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=-2.0, max_value=2.0),
       st.floats(min_value=-0.3, max_value=0.3))
def test_taylor_eval_matches_integration(a, x):
    # 45 terms: at the domain corner (|a|=2, |x|=0.3) the expansion radius
    # shrinks to ~0.46, and 30 terms leave a ~1e-7 truncation tail.
    ts = taylor_coefficients(a, 45)
    if abs(x) < 1e-3:
        x = 0.1
    ref = integrate(rhs_unscaled, 0.0, a, x).y_end
    assert abs(taylor_eval(ts, x) - ref) < 1e-8


# -- asymptotic tail -------------------------------------------------------


def test_tail_leading_term():
    t = AsymptoticTail(1, truncation=0)
    y, yp = asymptotic_tail_eval(t, 10.0)
    assert y == pytest.approx(0.15)
    assert yp == pytest.approx(-0.015)


def test_tail_c1_values():
    assert AsymptoticTail(2).coefficients[0] == pytest.approx(2.5 / PI)
    assert AsymptoticTail(1).coefficients[0] == pytest.approx(-1.5 / PI)
    # leading coefficient of the series itself
    assert AsymptoticTail(4).leading == 4.5


@pytest.mark.parametrize("trunc", range(0, 6))
def test_tail_residual_order(trunc):
    # ODE residual of the K-term tail scales like x^-(2K+2): doubling x
    # from 10 to 20 divides it by ~2^(2K+2).
    def residual(x):
        t = AsymptoticTail(3, trunc)
        y, yp = asymptotic_tail_eval(t, x)
        return abs(yp - rhs_unscaled(x, y))

    expo = math.log2(residual(10.0) / residual(20.0))
    assert expo == pytest.approx(2 * trunc + 2, abs=0.5)


def test_tail_not_asymptotic_raised():
    with pytest.raises(TailNotAsymptotic):
        asymptotic_tail_eval(AsymptoticTail(9), 2.0)
    with pytest.raises(ValueError):
        asymptotic_tail_eval(AsymptoticTail(1), -3.0)


def test_tail_admissible_at_prescribed_starts():
    for n in (1, 10, 500, 2000, 10000):
        x_start = max(20.0, 3 * math.sqrt(n))
        assert tail_is_asymptotic(AsymptoticTail(2 * n - 1), x_start)


# -- properties of the flow --------------------------------------------------


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=-2.0, max_value=2.0),
       st.floats(min_value=0.0, max_value=6.0),
       st.floats(min_value=0.0, max_value=6.0))
def test_lipschitz_in_x(a, x1, x2):
    # |rhs| <= 1 everywhere, so the solution is 1-Lipschitz.
    if abs(x1 - x2) < 1e-12:
        return
    hi = max(x1, x2, 0.1)
    traj = integrate(rhs_unscaled, 0.0, a, hi)
    assert abs(traj(x1) - traj(x2)) <= abs(x1 - x2) * (1 + 1e-9) + 1e-12


@settings(max_examples=10, deadline=None)
@given(st.floats(min_value=0.3, max_value=4.7))
def test_bundle_estimator_stabilizes_even(a):
    # Generic initial data joins an even-m bundle; the estimator settles by
    # x = 20.  Skip draws too close to a separatrix intercept.
    traj = integrate(rhs_unscaled, 0.0, a, 28.0)
    ms = {bundle_index(x, traj(x)) for x in (20.0, 22.0, 24.0, 26.0, 28.0)}
    if len(ms) != 1:
        return  # near-separatrix draw: estimator legitimately undecided
    m = ms.pop()
    assert m % 2 == 0


@settings(max_examples=10, deadline=None)
@given(st.floats(min_value=-2.0, max_value=2.0))
def test_reflection_symmetry(a):
    # w(x) = -y(-x) solves the same equation with w(0) = -a.
    t1 = integrate(rhs_unscaled, 0.0, a, -4.0)
    t2 = integrate(rhs_unscaled, 0.0, -a, 4.0)
    for x in (1.0, 2.5, 4.0):
        assert abs(-t1(-x) - t2(x)) < 1e-9


# -- hyperasymptotic splitting ----------------------------------------------


def test_bundle_decay_slope_is_minus_half_pi():
    # Two class-one solutions share the m=0 tail and separate by
    # ~K exp(-pi x^2 / 2); the fitted slope approaches -pi/2.
    slope = bundle_decay_fit(0.2, 0.4, (2.0, 4.0))
    assert slope == pytest.approx(-PI / 2, rel=0.01)
    assert slope < 0


def test_bundle_decay_deeper_window_converges():
    slope = bundle_decay_fit(0.2, 0.4, (3.0, 4.5))
    assert slope == pytest.approx(-PI / 2, rel=0.002)


def test_bundle_decay_identical_inputs_rejected():
    with pytest.raises(BundleMismatch):
        bundle_decay_fit(0.4, 0.4, (2.0, 4.0))


def test_bundle_decay_mismatched_bundles_rejected():
    # 0.4 joins m=0; 2.0 (two maxima) joins m=2.
    with pytest.raises(BundleMismatch):
        bundle_decay_fit(0.4, 2.0, (2.0, 4.0))


def test_bundle_decay_window_validation():
    with pytest.raises(ValueError):
        bundle_decay_fit(0.2, 0.4, (4.0, 2.0))
