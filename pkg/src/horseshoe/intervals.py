"""Rectangle enclosures for complex arithmetic.

A ComplexRect is the product of two closed real intervals, one for the real
part and one for the imaginary part.  Every operation returns a rectangle
that contains the exact image of its inputs: results of floating point
operations are widened outward by EPS_ULPS ulp steps, which dominates the
half-ulp error of each correctly rounded primitive.  Fields may be floats
or numpy arrays of matching shape; all operations are elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS_ULPS = 4

_NEG = np.float64(-np.inf)
_POS = np.float64(np.inf)


def _down(v):
    for _ in range(EPS_ULPS):
        v = np.nextafter(v, _NEG)
    return v


def _up(v):
    for _ in range(EPS_ULPS):
        v = np.nextafter(v, _POS)
    return v


# real interval primitives on (lo, hi) pairs


def iadd(alo, ahi, blo, bhi):
    return _down(alo + blo), _up(ahi + bhi)


def isub(alo, ahi, blo, bhi):
    return _down(alo - bhi), _up(ahi - blo)


def imul(alo, ahi, blo, bhi):
    p1 = alo * blo
    p2 = alo * bhi
    p3 = ahi * blo
    p4 = ahi * bhi
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    return _down(lo), _up(hi)


def iscale(alo, ahi, s: float):
    # multiply by an exact float scalar
    if s >= 0:
        return _down(alo * s), _up(ahi * s)
    return _down(ahi * s), _up(alo * s)


def isqr(alo, ahi):
    lo_c = np.minimum(alo * alo, ahi * ahi)
    hi = np.maximum(alo * alo, ahi * ahi)
    straddles = (alo <= 0) & (ahi >= 0)
    lo = np.where(straddles, 0.0, _down(lo_c))
    return np.maximum(lo, 0.0), _up(hi)


def iabs(alo, ahi):
    # |t| over t in [alo, ahi]; endpoint abs is exact
    lo = np.where((alo <= 0) & (ahi >= 0), 0.0, np.minimum(np.abs(alo), np.abs(ahi)))
    hi = np.maximum(np.abs(alo), np.abs(ahi))
    return lo, hi


def isqrt(alo, ahi):
    # tolerates slightly negative lower bounds from outward rounding
    return (np.maximum(_down(np.sqrt(np.maximum(alo, 0.0))), 0.0),
            _up(np.sqrt(np.maximum(ahi, 0.0))))


@dataclass(frozen=True, eq=False)
class ComplexRect:
    """Axis-aligned rectangle { z : re_lo <= Re z <= re_hi, im_lo <= Im z <= im_hi }."""

    re_lo: object
    re_hi: object
    im_lo: object
    im_hi: object

    @staticmethod
    def from_point(z: complex) -> "ComplexRect":
        z = complex(z)
        return ComplexRect(z.real, z.real, z.imag, z.imag)

    @staticmethod
    def from_disc(center: complex, radius: float) -> "ComplexRect":
        """Circumscribed rectangle of a closed disc."""
        c = complex(center)
        r = float(radius)
        return ComplexRect(_down(c.real - r), _up(c.real + r),
                           _down(c.imag - r), _up(c.imag + r))

    @staticmethod
    def hull_of_points(zs) -> "ComplexRect":
        re = [complex(z).real for z in zs]
        im = [complex(z).imag for z in zs]
        return ComplexRect(min(re), max(re), min(im), max(im))

    def __add__(self, other):
        if isinstance(other, ComplexRect):
            rlo, rhi = iadd(self.re_lo, self.re_hi, other.re_lo, other.re_hi)
            ilo, ihi = iadd(self.im_lo, self.im_hi, other.im_lo, other.im_hi)
        else:
            w = complex(other)
            rlo, rhi = _down(self.re_lo + w.real), _up(self.re_hi + w.real)
            ilo, ihi = _down(self.im_lo + w.imag), _up(self.im_hi + w.imag)
        return ComplexRect(rlo, rhi, ilo, ihi)

    __radd__ = __add__

    def __neg__(self):
        return ComplexRect(-self.re_hi, -self.re_lo, -self.im_hi, -self.im_lo)

    def __sub__(self, other):
        if isinstance(other, ComplexRect):
            return self + (-other)
        return self + (-complex(other))

    def __rsub__(self, other):
        return (-self) + complex(other)

    def __mul__(self, other):
        if isinstance(other, ComplexRect):
            # (A + iB)(C + iD) = (AC - BD) + i(AD + BC)
            ac = imul(self.re_lo, self.re_hi, other.re_lo, other.re_hi)
            bd = imul(self.im_lo, self.im_hi, other.im_lo, other.im_hi)
            ad = imul(self.re_lo, self.re_hi, other.im_lo, other.im_hi)
            bc = imul(self.im_lo, self.im_hi, other.re_lo, other.re_hi)
            rlo, rhi = isub(*ac, *bd)
            ilo, ihi = iadd(*ad, *bc)
            return ComplexRect(rlo, rhi, ilo, ihi)
        w = complex(other)
        ar = iscale(self.re_lo, self.re_hi, w.real)
        br = iscale(self.im_lo, self.im_hi, w.real)
        ai = iscale(self.re_lo, self.re_hi, w.imag)
        bi = iscale(self.im_lo, self.im_hi, w.imag)
        rlo, rhi = isub(*ar, *bi)
        ilo, ihi = iadd(*ai, *br)
        return ComplexRect(rlo, rhi, ilo, ihi)

    __rmul__ = __mul__

    def sqr(self) -> "ComplexRect":
        # (A + iB)^2 = (A^2 - B^2) + i 2AB; dedicated squares keep 0 tight
        a2 = isqr(self.re_lo, self.re_hi)
        b2 = isqr(self.im_lo, self.im_hi)
        ab = imul(self.re_lo, self.re_hi, self.im_lo, self.im_hi)
        rlo, rhi = isub(*a2, *b2)
        ilo, ihi = iadd(*ab, *ab)
        return ComplexRect(rlo, rhi, ilo, ihi)

    def abs2(self):
        """Interval bounds for |z|^2 over the rectangle."""
        a2 = isqr(self.re_lo, self.re_hi)
        b2 = isqr(self.im_lo, self.im_hi)
        lo, hi = iadd(*a2, *b2)
        return np.maximum(lo, 0.0), hi

    def abs_bounds(self):
        """Interval bounds for |z| over the rectangle."""
        return isqrt(*self.abs2())

    def min_abs(self):
        return self.abs_bounds()[0]

    def max_abs(self):
        return self.abs_bounds()[1]

    def contains(self, z: complex):
        z = complex(z)
        return ((self.re_lo <= z.real) & (z.real <= self.re_hi)
                & (self.im_lo <= z.imag) & (z.imag <= self.im_hi))

    def contains_rect(self, other: "ComplexRect"):
        return ((self.re_lo <= other.re_lo) & (other.re_hi <= self.re_hi)
                & (self.im_lo <= other.im_lo) & (other.im_hi <= self.im_hi))

    def intersects(self, other: "ComplexRect"):
        return ((self.re_lo <= other.re_hi) & (other.re_lo <= self.re_hi)
                & (self.im_lo <= other.im_hi) & (other.im_lo <= self.im_hi))

    def hull(self, other: "ComplexRect") -> "ComplexRect":
        return ComplexRect(np.minimum(self.re_lo, other.re_lo),
                           np.maximum(self.re_hi, other.re_hi),
                           np.minimum(self.im_lo, other.im_lo),
                           np.maximum(self.im_hi, other.im_hi))

    def inflate(self, eps: float) -> "ComplexRect":
        if eps < 0:
            raise ValueError("inflation amount must be nonnegative")
        return ComplexRect(_down(self.re_lo - eps), _up(self.re_hi + eps),
                           _down(self.im_lo - eps), _up(self.im_hi + eps))

    def midpoint(self):
        return (self.re_lo + self.re_hi) / 2 + 1j * (self.im_lo + self.im_hi) / 2

    def widths(self):
        return self.re_hi - self.re_lo, self.im_hi - self.im_lo

    def width(self):
        wr, wi = self.widths()
        return np.maximum(wr, wi)

    def is_point(self):
        return (self.re_lo == self.re_hi) & (self.im_lo == self.im_hi)


@dataclass(frozen=True, eq=False)
class Box2:
    """Product of two complex rectangles, a box in C^2."""

    x: ComplexRect
    y: ComplexRect

    @staticmethod
    def from_point(z) -> "Box2":
        return Box2(ComplexRect.from_point(z[0]), ComplexRect.from_point(z[1]))

    def contains(self, z):
        return self.x.contains(z[0]) & self.y.contains(z[1])

    def midpoint(self):
        return (self.x.midpoint(), self.y.midpoint())

    def width(self):
        return np.maximum(self.x.width(), self.y.width())


def polyval_rect(coeffs, z: ComplexRect) -> ComplexRect:
    """Horner evaluation of sum(coeffs[k] * z^k) as a rectangle enclosure.

    coeffs are exact complex constants, lowest degree first.
    """
    acc = ComplexRect.from_point(coeffs[-1])
    for c in reversed(coeffs[:-1]):
        acc = acc * z + complex(c)
    return acc
