import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsfield import calculus as jc
from dsfield.calculus import Jet, Jet3, Stencil, fd_derivative, quadrature

finite = st.floats(min_value=-10, max_value=10, allow_nan=False)
jets = st.builds(Jet, finite, finite, finite, finite, finite, finite)


def test_mul_square_of_linear():
    # (x+1)^2 at x=0
    a = Jet(1.0, 1.0, 0.0, 0.0, 0.0, 0.0)
    m = a * a
    assert (m.value, m.d1, m.d11) == (1.0, 2.0, 2.0)
    assert m.dt == m.d1t == m.dtt == 0.0


def test_sub_self_is_zero():
    a = Jet(3.0, -1.0, 2.0, 0.5, 0.25, -4.0)
    z = a - a
    assert all(e == 0.0 for e in z.entries())


def test_div_of_equal_exponentials_is_constant():
    z = 0.0
    e = jc.exp(jc.spatial(z))
    r = e / e
    assert r.value == pytest.approx(1.0, abs=0)
    for entry in r.entries()[1:]:
        assert entry == pytest.approx(0.0, abs=1e-15)


def test_exp_seed():
    e = jc.exp(jc.spatial(0.0))
    assert (e.value, e.d1, e.d11) == (1.0, 1.0, 1.0)


def test_cos_of_time_seed():
    c = jc.cos(jc.temporal(0.0))
    assert (c.value, c.dt, c.dtt) == (1.0, 0.0, -1.0)


def test_sqrt_of_exponential():
    # oracle: derivatives of exp(x/2) at 0 are 1, 1/2, 1/4
    s = jc.sqrt(jc.exp(jc.spatial(0.0)))
    assert s.value == pytest.approx(1.0, rel=1e-15)
    assert s.d1 == pytest.approx(0.5, rel=1e-15)
    assert s.d11 == pytest.approx(0.25, rel=1e-15)


def test_division_guard_marks_nonfinite():
    num = Jet(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    den = Jet(0.0, 1.0, 0.0, 0.0, 0.0, 0.0)
    r = num / den
    assert not np.all(r.is_finite())
    assert not np.isfinite(r.value)


def test_domain_violations_mark_nonfinite():
    assert not np.isfinite(jc.log(Jet(-1.0)).value)
    assert not np.isfinite(jc.sqrt(Jet(-0.5)).value)
    near_pole = math.pi / 2 + 1e-14
    assert not np.isfinite(jc.tan(Jet(near_pole)).value)


def test_nonfinite_propagates_through_arithmetic():
    bad = jc.log(Jet(-1.0))
    out = (bad + 1.0) * 2.0 - bad
    assert not np.isfinite(out.value)
    assert not np.isfinite(jc.powi(bad, 0).value)  # even x**0 stays marked


@given(jets, jets)
def test_leibniz_rule_is_exact(a, b):
    m = a * b
    assert m.d1 == a.d1 * b.value + a.value * b.d1
    assert m.dt == a.dt * b.value + a.value * b.dt
    assert m.d11 == a.d11 * b.value + 2.0 * a.d1 * b.d1 + a.value * b.d11


@settings(max_examples=60)
@given(st.floats(min_value=-1.2, max_value=1.2),
       st.floats(min_value=-1.2, max_value=1.2))
def test_jets_agree_with_finite_differences(x, t):
    # cross-validation of the two derivative engines on a smooth composite
    def f(xx, tt):
        return np.exp(np.sin(xx) * np.cos(tt) + 0.3 * xx * tt)

    j = jc.exp(jc.sin(jc.spatial(x)) * jc.cos(jc.temporal(t))
               + 0.3 * jc.spatial(x) * jc.temporal(t))
    h = 1e-5
    d1 = (f(x + h, t) - f(x - h, t)) / (2 * h)
    dt = (f(x, t + h) - f(x, t - h)) / (2 * h)
    d11 = (f(x + h, t) - 2 * f(x, t) + f(x - h, t)) / h**2
    scale = abs(j.value) + 1.0
    assert j.value == pytest.approx(f(x, t), rel=1e-12)
    assert j.d1 == pytest.approx(d1, abs=1e-8 * scale)
    assert j.dt == pytest.approx(dt, abs=1e-8 * scale)
    assert j.d11 == pytest.approx(d11, abs=1e-4 * scale)


def test_jet3_matches_analytic_tan_derivatives():
    v = 0.3
    j = jc.tan(jc.spatial3(v))
    T, S = math.tan(v), 1.0 / math.cos(v) ** 2
    assert j.d1 == pytest.approx(S, rel=1e-14)
    assert j.d11 == pytest.approx(2 * S * T, rel=1e-14)
    assert j.d111 == pytest.approx(4 * S * T * T + 2 * S * S, rel=1e-14)


def test_jet3_third_derivative_against_finite_differences():
    def f(xx):
        return np.exp(np.sin(xx))

    x, h = 0.4, 1e-2
    j = jc.exp(jc.sin(jc.spatial3(x)))
    fd3 = (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h**3)
    assert j.d111 == pytest.approx(fd3, abs=1e-3)


def test_jet3_truncates_to_jet():
    j3 = jc.exp(jc.spatial3(0.7))
    j2 = jc.truncate(j3)
    assert isinstance(j2, Jet)
    assert j2.entries() == j3.entries()[:6]


def test_jet_mixing_orders_raises():
    with pytest.raises(TypeError):
        Jet(1.0) + Jet3(1.0)


def test_partial_lookup_and_overflow():
    j = Jet(1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
    assert j.partial(1, 1) == 5.0
    with pytest.raises(ValueError):
        j.partial(2, 1)


# -- stencils ----------------------------------------------------------------


@pytest.mark.parametrize("order,accuracy", [(1, 2), (1, 4), (2, 2), (2, 4),
                                            (4, 2), (4, 4)])
def test_stencil_polynomial_exactness(order, accuracy):
    # exact for monomials up to degree order + accuracy - 1
    st_ = Stencil(order, accuracy, 0.5)
    xs = st_.offsets * st_.h
    for deg in range(order + accuracy):
        samples = (1.0 + xs) ** deg
        want = math.perm(deg, order) * 1.0 ** (deg - order) if deg >= order else 0.0
        got = fd_derivative(samples, st_)
        assert got == pytest.approx(want, abs=1e-9 * max(1.0, abs(want)))


def test_stencil_rejects_bad_parameters():
    with pytest.raises(ValueError):
        Stencil(3, 2, 0.1)
    with pytest.raises(ValueError):
        Stencil(2, 2, -1.0)


def test_fd_second_derivative_of_square():
    st_ = Stencil(2, 2, 0.37)
    xs = 1.3 + st_.offsets * st_.h
    assert fd_derivative(xs**2, st_) == pytest.approx(2.0, rel=1e-12)


def test_fd_second_derivative_of_sin_at_zero():
    st_ = Stencil(2, 2, 1e-3)
    assert abs(fd_derivative(np.sin(st_.offsets * st_.h), st_)) < 1e-6


def test_fd_fourth_derivative_convergence():
    # halving h cuts the accuracy-4 error by about 16x; h large enough that
    # truncation still dominates the eps/h^4 roundoff floor
    errs = []
    for h in (0.1, 0.05):
        st_ = Stencil(4, 4, h)
        samples = np.exp(st_.offsets * st_.h)
        errs.append(abs(fd_derivative(samples, st_) - 1.0))
    ratio = errs[0] / errs[1]
    assert 12.0 < ratio < 20.0


def test_fd_wrong_sample_count():
    with pytest.raises(ValueError):
        fd_derivative([1.0, 2.0], Stencil(2, 2, 0.1))


def test_fd_nonfinite_sample_flags_result():
    out = fd_derivative([1.0, np.nan, 1.0], Stencil(2, 2, 0.1))
    assert not np.isfinite(out)


# -- quadrature ---------------------------------------------------------------


def test_quadrature_constant():
    assert quadrature(lambda x: np.ones_like(x), 0.0, 1.0, 16) == pytest.approx(1.0, abs=0)


def test_quadrature_cubic_exact():
    got = quadrature(lambda x: x**3, 0.0, 1.0, 8)
    assert got == pytest.approx(0.25, rel=1e-14)


def test_quadrature_sine():
    got = quadrature(np.sin, 0.0, math.pi, 256)
    assert got == pytest.approx(2.0, abs=1e-8)


def test_quadrature_reports_bad_abscissa():
    def f(x):
        return np.where(x > 0.5, np.nan, 1.0)

    with pytest.raises(ValueError, match="non-finite integrand"):
        quadrature(f, 0.0, 1.0, 8)


def test_quadrature_needs_two_subintervals():
    with pytest.raises(ValueError):
        quadrature(np.sin, 0.0, 1.0, 1)
