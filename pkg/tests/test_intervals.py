"""Rectangle arithmetic: containment under random sampling, exactness at 0."""

import numpy as np
import pytest

from horseshoe.intervals import Box2, ComplexRect, polyval_rect

RNG = np.random.default_rng(20260814)


def random_rect(scale=5.0):
    a, b = sorted(RNG.uniform(-scale, scale, 2))
    c, d = sorted(RNG.uniform(-scale, scale, 2))
    return ComplexRect(a, b, c, d)


def sample(rect, n=64):
    re = RNG.uniform(rect.re_lo, rect.re_hi, n)
    im = RNG.uniform(rect.im_lo, rect.im_hi, n)
    return re + 1j * im


def test_add_contains_samples():
    for _ in range(50):
        r1, r2 = random_rect(), random_rect()
        out = r1 + r2
        for z in sample(r1, 16):
            for w in sample(r2, 16):
                assert out.contains(z + w)


def test_mul_contains_samples():
    for _ in range(50):
        r1, r2 = random_rect(), random_rect()
        out = r1 * r2
        for z in sample(r1, 12):
            for w in sample(r2, 12):
                assert out.contains(z * w)


def test_sub_and_const_ops():
    r = random_rect()
    z0 = complex(1.25, -0.5)
    for z in sample(r):
        assert (r - z0).contains(z - z0)
        assert (z0 - r).contains(z0 - z)
        assert (r * z0).contains(z * z0)
        assert (r + z0).contains(z + z0)
        assert (-r).contains(-z)


def test_sqr_matches_mul_but_tighter():
    for _ in range(50):
        r = random_rect()
        s = r.sqr()
        for z in sample(r, 40):
            assert s.contains(z * z)
        m = r * r
        # the dedicated square never widens past the generic product
        assert s.re_lo >= m.re_lo - 1e-12 and s.re_hi <= m.re_hi + 1e-12


def test_abs_bounds():
    for _ in range(50):
        r = random_rect()
        lo, hi = r.abs_bounds()
        for z in sample(r, 60):
            assert lo <= abs(z) <= hi


def test_abs_bounds_straddling_origin_is_zero():
    r = ComplexRect(-1.0, 2.0, -0.5, 0.5)
    lo, hi = r.abs_bounds()
    assert lo == 0.0
    assert hi >= abs(complex(2.0, 0.5))


def test_point_rect_roundtrip():
    z = complex(0.1, -0.2)
    r = ComplexRect.from_point(z)
    assert r.contains(z)
    assert r.width() == 0.0


def test_from_disc_circumscribes():
    r = ComplexRect.from_disc(1 + 2j, 3.0)
    th = np.linspace(0, 2 * np.pi, 100)
    for z in 1 + 2j + 3.0 * np.exp(1j * th):
        assert r.contains(z)


def test_hull_and_intersects():
    r1 = ComplexRect(0, 1, 0, 1)
    r2 = ComplexRect(2, 3, 2, 3)
    h = r1.hull(r2)
    assert h.contains(0.5 + 0.5j) and h.contains(2.5 + 2.5j)
    assert not r1.intersects(r2)
    assert r1.intersects(ComplexRect(1, 2, 1, 2))


def test_polyval_rect_contains_poly_values():
    coeffs = (complex(-10, 0), 0j, complex(1, 0))
    for _ in range(30):
        r = random_rect(3.0)
        out = polyval_rect(coeffs, r)
        for z in sample(r, 40):
            assert out.contains(z * z - 10)


def test_vectorized_fields_broadcast():
    lo = np.array([0.0, 1.0])
    hi = np.array([1.0, 2.0])
    r = ComplexRect(lo, hi, lo, hi)
    s = r.sqr()
    assert s.re_lo.shape == (2,)
    lo_abs, hi_abs = r.abs_bounds()
    assert np.all(lo_abs <= hi_abs)


def test_box2_membership():
    b = Box2(ComplexRect(0, 1, 0, 1), ComplexRect(-1, 0, -1, 0))
    assert b.contains((0.5 + 0.5j, -0.5 - 0.5j))
    assert not b.contains((2 + 0j, -0.5 - 0.5j))


def test_inflate_grows_all_sides():
    r = ComplexRect(0, 1, 0, 1)
    g = r.inflate(0.25)
    assert g.contains(-0.2 + 0j) and g.contains(1.2 + 1.2j)
    with pytest.raises(ValueError):
        r.inflate(-1.0)
