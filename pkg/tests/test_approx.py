import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zcovers import examples as ex
from zcovers.approx import (
    BadEps,
    NotAStrip,
    admits_rectangle,
    admits_rectangle_float,
    dilation_factor,
    sigma_prime_measure,
    stage_quantities,
    strips_in_direction,
)
from zcovers.cover import LiftClass, make_cover
from zcovers.numfield import QQ, Vec
from zcovers.surface import RelativeCycle, build_surface

VERT = Vec(QQ(0), QQ(1))


def pt(x, y):
    return (0, Vec(QQ(Fraction(x)), QQ(Fraction(y))))


@pytest.fixture(scope="module")
def torus_strip():
    cov = ex.torus().cover()
    (s,) = strips_in_direction(cov, VERT, 2)
    return cov, s


def thin_torus():
    s = build_surface([[(0, 0), (1, 0), (1, Fraction(1, 10)), (0, Fraction(1, 10))]],
                      {(0, 0): (0, 2), (0, 1): (0, 3)}, [0])
    return make_cover(s, RelativeCycle.from_edges(s, {(0, 0): 1}))


def test_stage_quantities():
    lc = LiftClass("Strip", 1, Vec(QQ(2), QQ(0)), QQ(1))
    st_ = stage_quantities(lc, Fraction(1, 2))
    assert st_.h == pytest.approx(0.25)
    assert st_.eta == pytest.approx(1 / 64)
    assert st_.c == Fraction(3, 2)
    assert st_.band_fits()


def test_dilation_and_bad_eps():
    assert dilation_factor(Fraction(1, 2)) == Fraction(3, 2)
    for bad in (0, 1, -0.2, 1.5):
        with pytest.raises(BadEps):
            dilation_factor(bad)
    with pytest.raises(NotAStrip):
        stage_quantities(LiftClass("ClosedCylinder", 0, VERT, QQ(1)), 0.5)


def test_torus_strip_is_vertical(torus_strip):
    _, s = torus_strip
    assert abs(s.lift.k) == 1
    assert s.lift.area == 1


def test_admits_on_core_line(torus_strip):
    cov, s = torus_strip
    assert admits_rectangle(cov, pt("1/2", "1/3"), s, Fraction(1, 2))
    assert admits_rectangle(cov, pt("1/2", "1/3"), s, Fraction(99, 100))


def test_rejects_on_strip_boundary(torus_strip):
    cov, s = torus_strip
    assert not admits_rectangle(cov, pt(0, "1/3"), s, Fraction(1, 2))


def test_admits_near_core_under_approximation(torus_strip):
    cov, s = torus_strip
    th = Vec(QQ(1), QQ(10))  # slope 10: about 0.0997 rad off the core
    # dilated half-span 3/2 * 10/101 ~ 0.149
    assert admits_rectangle(cov, pt("6/10", "1/2"), s, Fraction(1, 2), th)
    assert not admits_rectangle(cov, pt("9/10", "1/2"), s, Fraction(1, 2), th)
    assert admits_rectangle_float(cov, pt("6/10", "1/2"), s, 0.5, math.atan2(10, 1))


def test_sigma_prime_on_torus_near_full_eps(torus_strip):
    cov, s = torus_strip
    est = sigma_prime_measure(cov, s, 0.99, 100_000, seed=7)
    assert abs(est.estimate - 0.99**2 / 4) <= est.radius * 1.5


def test_sigma_prime_saturates_on_thin_torus():
    cov = thin_torus()
    (s,) = strips_in_direction(cov, VERT, 2)
    # eta = 0.81 / 0.8 exceeds the half-width 1/2, so every point counts
    est = sigma_prime_measure(cov, s, 0.9, 2000, seed=1)
    assert est.hits == est.samples
    assert est.estimate == pytest.approx(0.1)


def test_sigma_prime_is_reproducible(torus_strip):
    cov, s = torus_strip
    a = sigma_prime_measure(cov, s, 0.5, 5000, seed=11)
    b = sigma_prime_measure(cov, s, 0.5, 5000, seed=11)
    c = sigma_prime_measure(cov, s, 0.5, 5000, seed=12)
    assert a == b
    assert a.hits != c.hits or a.seed != c.seed
    with pytest.raises(ValueError):
        sigma_prime_measure(cov, s, 0.5, 10, seed=1)


def test_staircase_strip_band_floor():
    b = ex.staircase()
    cov = b.cover()
    (s, *_) = strips_in_direction(cov, Vec(QQ(1), QQ(1)), 10)
    for k in range(1, 10):
        est = sigma_prime_measure(cov, s, k / 10, 20_000, seed=k)
        assert est.estimate >= (k / 10) ** 2 / 4 - est.radius


@given(st.fractions(Fraction(1, 100), Fraction(99, 100)), st.fractions(Fraction(1, 100), Fraction(99, 100)),
       st.fractions(0, 1), st.fractions(0, 1), st.integers(1, 30), st.integers(-30, 30))
@settings(max_examples=80, deadline=None)
def test_admissibility_monotone_in_eps(e1, e2, x, y, a, b):
    cov = ex.torus().cover()
    (s,) = strips_in_direction(cov, VERT, 2)
    lo, hi = sorted((e1, e2))
    th = Vec(QQ(b), QQ(a))
    if x in (0, 1):
        return
    p = (0, Vec(QQ(x), QQ(y)))
    if admits_rectangle(cov, p, s, hi, th):
        assert admits_rectangle(cov, p, s, lo, th)


@given(st.floats(0.02, 0.98), st.floats(0.02, 0.98), st.floats(0.05, 0.95), st.floats(1.0, 2.1))
@settings(max_examples=80, deadline=None)
def test_float_predicate_agrees_with_exact(x, y, eps, theta):
    cov = ex.torus().cover()
    (s,) = strips_in_direction(cov, VERT, 2)
    q = Fraction(theta).limit_denominator(1000)
    th = Vec(QQ(1), QQ(Fraction(math.tan(q)).limit_denominator(10**6)))
    xe, ye = Fraction(x).limit_denominator(1000), Fraction(y).limit_denominator(1000)
    exact = admits_rectangle(cov, (0, Vec(QQ(xe), QQ(ye))), s, Fraction(eps).limit_denominator(1000), th)
    fl = admits_rectangle_float(cov, (0, (float(xe), float(ye))), s,
                                float(Fraction(eps).limit_denominator(1000)), math.atan2(*reversed(th.to_float())))
    # skip cases within rounding of the boundary
    c = float(dilation_factor(Fraction(eps).limit_denominator(1000)))
    vx, vy = 0.0, 1.0
    ux, uy = th.to_float()
    n = math.hypot(ux, uy)
    span = abs(vy * uy) * abs(vx * uy - vy * ux) / n / n
    margin = abs(abs(float(xe) - 0.5) + c * span - 0.5)
    if margin > 1e-9:
        assert exact == fl
