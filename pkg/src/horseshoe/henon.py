"""Generalized Henon maps of C^2 and round bidiscs.

F(x, y) = (p(x) - a*y, x) with p a polynomial of degree d >= 2 and a != 0.
F is a polynomial automorphism; its inverse is (x, y) |-> (y, (p(y) - x)/a).
The module also houses the round bidisc domain, the escape radius of the
quadratic normal form p(x) = x^d + c, the boundary separation check used by
the horseshoe certificates, and the slice degree count.
"""

from __future__ import annotations

import cmath
import enum
import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .intervals import Box2, ComplexRect, polyval_rect


class Diverged(Exception):
    """An image left the range of floating point numbers."""


class Verdict(str, enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"

    def __str__(self):
        return self.value


def _as_complex_tuple(coeffs):
    return tuple(complex(c) for c in coeffs)


@dataclass(frozen=True)
class HenonMap:
    """F(x, y) = (p(x) - a*y, x), coeffs lowest degree first, leading != 0."""

    coeffs: tuple
    a: complex

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_complex_tuple(self.coeffs))
        object.__setattr__(self, "a", complex(self.a))
        if len(self.coeffs) < 3:
            raise ValueError("polynomial degree must be at least 2")
        if self.coeffs[-1] == 0:
            raise ValueError("leading coefficient must be nonzero")
        if self.a == 0:
            raise ValueError("a must be nonzero, F is not invertible otherwise")

    @staticmethod
    def quadratic(a: complex, c: complex) -> "HenonMap":
        """Normal form p(x) = x^2 + c."""
        return HenonMap((complex(c), 0.0, 1.0), a)

    @staticmethod
    def normal_form(d: int, a: complex, c: complex) -> "HenonMap":
        """p(x) = x^d + c."""
        if d < 2:
            raise ValueError("degree must be at least 2")
        return HenonMap((complex(c),) + (0.0,) * (d - 1) + (1.0,), a)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def c(self) -> complex:
        return self.coeffs[0]

    @property
    def is_normal_form(self) -> bool:
        return (self.coeffs[-1] == 1
                and all(c == 0 for c in self.coeffs[1:-1]))

    # polynomial and derivative, for scalars or numpy arrays

    def poly(self, x):
        acc = np.full_like(np.asarray(x, dtype=complex), self.coeffs[-1]) \
            if isinstance(x, np.ndarray) else self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    def dpoly(self, x):
        dcoef = self._dcoeffs()
        acc = np.full_like(np.asarray(x, dtype=complex), dcoef[-1]) \
            if isinstance(x, np.ndarray) else dcoef[-1]
        for c in reversed(dcoef[:-1]):
            acc = acc * x + c
        return acc

    def _dcoeffs(self):
        return tuple(k * c for k, c in enumerate(self.coeffs))[1:]

    # point dynamics

    def apply(self, z):
        x, y = complex(z[0]), complex(z[1])
        w = (self.poly(x) - self.a * y, x)
        if not (cmath.isfinite(w[0]) and cmath.isfinite(w[1])):
            raise Diverged(f"image of {z!r} overflowed")
        return w

    def apply_inverse(self, z):
        x, y = complex(z[0]), complex(z[1])
        w = (y, (self.poly(y) - x) / self.a)
        if not (cmath.isfinite(w[0]) and cmath.isfinite(w[1])):
            raise Diverged(f"inverse image of {z!r} overflowed")
        return w

    def apply_xy(self, x, y):
        """Vectorized forward image, no overflow check."""
        return self.poly(x) - self.a * y, x

    def apply_inverse_xy(self, x, y):
        return y, (self.poly(y) - x) / self.a

    # rectangle enclosures

    def apply_box(self, box: Box2) -> Box2:
        px = polyval_rect(self.coeffs, box.x)
        return Box2(px - box.y * self.a, box.x)

    def apply_inverse_box(self, box: Box2) -> Box2:
        py = polyval_rect(self.coeffs, box.y)
        return Box2(box.y, (py - box.x) * (1.0 / self.a))

    # derivative

    def jacobian(self, z):
        x = complex(z[0])
        return np.array([[self.dpoly(x), -self.a], [1.0, 0.0]], dtype=complex)

    def jacobian_box(self, box: Box2):
        """Entrywise rectangle enclosure of the Jacobian over the box."""
        j11 = polyval_rect(self._dcoeffs(), box.x)
        return ((j11, ComplexRect.from_point(-self.a)),
                (ComplexRect.from_point(1.0), ComplexRect.from_point(0.0)))

    # escape bounds

    def escape_radius(self) -> float:
        """Infimum radius R0 = (1 + |a| + sqrt((1+|a|)^2 + 4|c|)) / 2.

        Exact for the normal form x^d + c; for general p the constant |c| is
        replaced by the sum of the moduli of the coefficients below the
        leading one.  Consumers must use a radius strictly larger than R0.
        """
        s = sum(abs(c) for c in self.coeffs[:-1])
        t = 1.0 + abs(self.a)
        return 0.5 * (t + math.sqrt(t * t + 4.0 * s))

    def certified_escape_radius(self) -> float:
        """Radius beyond which modulus growth is certified in both time directions.

        Smallest t beyond every real root of h and h', where
        h(t) = |c_d| t^d - sum_{i<d} |c_i| t^i - (1+|a|) t.
        If |x| > t and |y| <= |x| then |pi_1 F(x,y)| - |x| >= h(|x|) > 0 and h
        is increasing, so the first coordinate grows without bound; the same
        h controls the second coordinate of the inverse.  Coincides with
        escape_radius for the quadratic normal form.
        """
        return _certified_radius(self)

    def descriptor(self) -> str:
        """Canonical text form, parseable by parse_map."""
        if self.is_normal_form:
            return (f"henon d={self.degree} a={format_complex(self.a)} "
                    f"c={format_complex(self.c)}")
        inner = ",".join(format_complex(c) for c in self.coeffs)
        return f"poly [{inner}] a={format_complex(self.a)}"


@lru_cache(maxsize=None)
def _certified_radius(map: HenonMap) -> float:
    d = map.degree
    h = [0.0] * (d + 1)
    h[d] = abs(map.coeffs[-1])
    for i in range(d):
        h[i] -= abs(map.coeffs[i])
    h[1] -= 1.0 + abs(map.a)
    t = 1.0
    for poly in (h, [k * c for k, c in enumerate(h)][1:]):
        roots = np.roots(list(reversed(poly)))
        for r in roots:
            if abs(r.imag) <= 1e-9 * (1.0 + abs(r.real)):
                t = max(t, r.real)
    return t * (1.0 + 1e-12) + 1e-300


@dataclass(frozen=True)
class Bidisc:
    """Product of closed round discs D(c1, r1) x D(c2, r2)."""

    c1: complex = 0.0
    c2: complex = 0.0
    r1: float = 1.0
    r2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "c1", complex(self.c1))
        object.__setattr__(self, "c2", complex(self.c2))
        if not (self.r1 > 0 and self.r2 > 0):
            raise ValueError("radii must be positive")

    @staticmethod
    def round(radius: float) -> "Bidisc":
        return Bidisc(0.0, 0.0, float(radius), float(radius))

    def contains(self, z):
        return (abs(complex(z[0]) - self.c1) <= self.r1
                and abs(complex(z[1]) - self.c2) <= self.r2)

    def contains_xy(self, x, y):
        """Vectorized closed membership."""
        return (np.abs(x - self.c1) <= self.r1) & (np.abs(y - self.c2) <= self.r2)

    def x_rect(self) -> ComplexRect:
        return ComplexRect.from_disc(self.c1, self.r1)

    def y_rect(self) -> ComplexRect:
        return ComplexRect.from_disc(self.c2, self.r2)

    def box(self) -> Box2:
        return Box2(self.x_rect(), self.y_rect())

    def horizontal_slice(self, y: complex):
        """H_y = D(c1, r1) x {y}."""
        return (self.c1, self.r1, complex(y))

    def vertical_slice(self, x: complex):
        """V_x = {x} x D(c2, r2)."""
        return (complex(x), self.c2, self.r2)

    def circle1(self, n: int):
        th = 2.0 * np.pi * np.arange(n) / n
        return self.c1 + self.r1 * np.exp(1j * th)

    def circle2(self, n: int):
        th = 2.0 * np.pi * np.arange(n) / n
        return self.c2 + self.r2 * np.exp(1j * th)


def _arc_rects(center: complex, radius: float, n: int) -> ComplexRect:
    """n rectangles jointly covering the circle, one per arc between samples.

    Hull of consecutive sample points, inflated by the sagitta of the arc.
    """
    th = 2.0 * np.pi * np.arange(n + 1) / n
    pts = center + radius * np.exp(1j * th)
    sag = radius * (1.0 - math.cos(math.pi / n)) + 1e-12 * radius
    re0, re1 = pts.real[:-1], pts.real[1:]
    im0, im1 = pts.imag[:-1], pts.imag[1:]
    return ComplexRect(np.minimum(re0, re1), np.maximum(re0, re1),
                       np.minimum(im0, im1), np.maximum(im0, im1)).inflate(sag)


@dataclass(frozen=True)
class BoundaryReport:
    """Outcome of the boundary separation check."""

    verdict: Verdict
    margin: float
    orientation: str
    samples: int


def check_quasi_henon_like(map: HenonMap, B: Bidisc,
                           orientation: str = "horizontal",
                           samples: int = 4096) -> BoundaryReport:
    """Check the boundary disjointness conditions on the bidisc.

    horizontal: F(closure B) misses the horizontal boundary D1 x dD2 and
    F(dD1 x D2) misses the closure of B.  vertical: the dual pair, with the
    roles of the two boundary pieces exchanged.  The verdict is three valued;
    margin is a certified lower bound on the separation distance (max metric
    on C^2) when yes, and the deepest observed penetration when no.
    Inconclusive enclosures are reported as unknown, never as a definite
    answer.
    """
    if orientation not in ("horizontal", "vertical"):
        raise ValueError("orientation must be 'horizontal' or 'vertical'")
    a, c1, c2, r1, r2 = map.a, B.c1, B.c2, B.r1, B.r2
    aa = abs(a)
    scale = 1.0 + max(r1, r2)
    tol = 1e-9 * scale
    # witnesses may sit exactly on a boundary circle in one coordinate
    # (the second image coordinate equals x); closed membership there is
    # accepted within tol_eq while the other coordinate must be strictly
    # inside for a definite no
    tol_eq = 1e-12 * scale

    margins = []
    definite_no = None

    def probe(p1, p2):
        pen_max = np.maximum(p1, p2)
        pen_min = np.minimum(p1, p2)
        hits = (pen_max <= tol_eq) & (pen_min < -tol)
        if np.any(hits):
            return float(np.min(pen_min[hits]))
        return None

    def clause_image_of_vertical_boundary():
        # F(dD1 x D2) against closure B; for fixed x the first image
        # coordinate sweeps the disc p(x) - a*D2, so the distance minimum
        # over y is exact; only the arc of x needs an enclosure.
        arcs = _arc_rects(c1, r1, samples)
        w = polyval_rect(map.coeffs, arcs) - (c1 + a * c2)
        m1 = w.min_abs() - aa * r2 - r1
        m2 = (arcs - c2).min_abs() - r2
        sep = np.maximum(m1, m2)
        if np.all(sep > 0):
            return float(np.min(sep))
        # probe sample points for a definite hit
        xs = B.circle1(samples)
        p1 = np.abs(map.poly(xs) - (c1 + a * c2)) - aa * r2 - r1
        p2 = np.abs(xs - c2) - r2
        return probe(p1, p2)

    def clause_preimage_of_horizontal_boundary():
        # F(closure B) against D1 x dD2, tested as F^{-1}(D1 x dD2) against
        # closure B; for y on dD2 the second coordinate of the inverse sweeps
        # (p(y) - D1 - a*c2)/a, again exact in the disc variable.
        arcs = _arc_rects(c2, r2, samples)
        w = polyval_rect(map.coeffs, arcs) - (c1 + a * c2)
        m2 = (w.min_abs() - r1) / aa - r2
        m1 = (arcs - c1).min_abs() - r1
        sep = np.maximum(m1, m2)
        if np.all(sep > 0):
            return float(np.min(sep))
        ys = B.circle2(samples)
        p2 = (np.abs(map.poly(ys) - (c1 + a * c2)) - r1) / aa - r2
        p1 = np.abs(ys - c1) - r1
        return probe(p1, p2)

    def clause_image_of_horizontal_boundary():
        # F(D1 x dD2) against closure B; p ranges over the full x disc, so
        # the enclosure uses the circumscribed rectangle of D1.
        arcs = _arc_rects(c2, r2, samples)
        px = polyval_rect(map.coeffs, B.x_rect())
        w1 = px - arcs * a - c1
        m1 = w1.min_abs() - r1
        m2 = max(0.0, abs(c1 - c2) - r1) - r2
        sep = np.maximum(m1, m2)
        if np.all(sep > 0):
            return float(np.min(sep))
        ys = B.circle2(samples)
        k = max(8, samples // 256)
        xs = np.concatenate([[c1], c1 + B.r1 * np.exp(2j * np.pi * np.arange(k) / k),
                             c1 + 0.5 * B.r1 * np.exp(2j * np.pi * np.arange(k) / k)])
        u, v = np.meshgrid(xs, ys)
        p1 = np.abs(map.poly(u) - a * v - c1) - r1
        p2 = np.abs(u - c2) - r2
        return probe(p1, p2)

    def clause_preimage_of_vertical_boundary():
        # F(closure B) against dD1 x D2, tested as F^{-1}(dD1 x D2) against
        # closure B; the y disc passes through p, rectangle enclosure again.
        arcs = _arc_rects(c1, r1, samples)
        py = polyval_rect(map.coeffs, B.y_rect())
        w2 = (py - arcs - a * c2) * (1.0 / a)
        m2 = w2.min_abs() - r2
        m1 = max(0.0, abs(c2 - c1) - r2) - r1
        sep = np.maximum(m1, m2)
        if np.all(sep > 0):
            return float(np.min(sep))
        xs = B.circle1(samples)
        k = max(8, samples // 256)
        ys = np.concatenate([[c2], c2 + B.r2 * np.exp(2j * np.pi * np.arange(k) / k),
                             c2 + 0.5 * B.r2 * np.exp(2j * np.pi * np.arange(k) / k)])
        u, v = np.meshgrid(xs, ys)
        p2 = np.abs((map.poly(v) - u) / a - c2) - r2
        p1 = np.abs(v - c1) - r1
        return probe(p1, p2)

    if orientation == "horizontal":
        clauses = (clause_image_of_vertical_boundary,
                   clause_preimage_of_horizontal_boundary)
    else:
        clauses = (clause_image_of_horizontal_boundary,
                   clause_preimage_of_vertical_boundary)

    unknown = False
    for clause in clauses:
        out = clause()
        if out is None:
            unknown = True
        elif out < 0:
            if definite_no is None or out < definite_no:
                definite_no = out
        else:
            margins.append(out)
    if definite_no is not None:
        return BoundaryReport(Verdict.NO, definite_no, orientation, samples)
    if unknown:
        return BoundaryReport(Verdict.UNKNOWN, 0.0, orientation, samples)
    return BoundaryReport(Verdict.YES, min(margins), orientation, samples)


def boundary_degree(map: HenonMap, B: Bidisc, y: complex,
                    samples: int = 4096, base: complex | None = None) -> int:
    """Winding number of x |-> p(x) - a*y - w around 0 for x on dD1.

    w defaults to the center of D1; equals the degree of the slice
    x |-> pi_1 F(x, y) over the first disc when the boundary check passed.
    """
    w = complex(base) if base is not None else B.c1
    n = int(samples)
    for _ in range(5):
        f = map.poly(B.circle1(n)) - map.a * complex(y) - w
        if np.min(np.abs(f)) > 1e-9 * (1.0 + np.max(np.abs(f))):
            ang = np.angle(np.roll(f, -1) / f)
            total = float(np.sum(ang)) / (2.0 * math.pi)
            k = round(total)
            if abs(total - k) < 0.1:
                return int(k)
        n *= 2
    raise ValueError("boundary samples pass too close to the base point; "
                     "winding number not resolved")


_COMPLEX_RE = re.compile(
    r"""^\s*
    (?P<re>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?
    (?P<im>(?:[+-](?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)|(?:(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?))?
    (?P<imark>i)?\s*$""",
    re.VERBOSE,
)


def parse_complex(text: str) -> complex:
    """Parse 're+imi' literals: '1', '-10+0i', '2i', '-i', '1.5e-3-2i'."""
    t = text.strip()
    if not t:
        raise ValueError("empty complex literal")
    m = _COMPLEX_RE.match(t)
    if not m or (m.group("re") is None and m.group("im") is None
                 and m.group("imark") is None):
        raise ValueError(f"bad complex literal: {text!r}")
    re_part, im_part, imark = m.group("re"), m.group("im"), m.group("imark")
    if im_part is not None and imark is None:
        raise ValueError(f"bad complex literal: {text!r}")
    if imark:
        if im_part is None:
            # forms 'i', '3i', '-2.5i': the number landed in the re group
            return complex(0.0, float(re_part) if re_part is not None else 1.0)
        sign_only = im_part in ("+", "-")
        imv = float(im_part + "1") if sign_only else float(im_part)
        return complex(float(re_part) if re_part is not None else 0.0, imv)
    return complex(float(re_part), 0.0)


def format_complex(z: complex) -> str:
    z = complex(z)
    sign = "+" if z.imag >= 0 else "-"
    # repr of a float is the shortest string that round-trips
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def parse_map(text: str) -> HenonMap:
    """Parse a map descriptor.

    'henon d=2 a=1+0i c=-10+0i' for the normal form x^d + c, or
    'poly [c0,c1,...,cd] a=1+0i' for explicit coefficients, lowest first.
    """
    t = text.strip()
    if t.startswith("henon"):
        fields = dict(tok.split("=", 1) for tok in t[len("henon"):].split())
        missing = {"d", "a", "c"} - fields.keys()
        if missing:
            raise ValueError(f"map descriptor missing fields: {sorted(missing)}")
        return HenonMap.normal_form(int(fields["d"]),
                                    parse_complex(fields["a"]),
                                    parse_complex(fields["c"]))
    if t.startswith("poly"):
        m = re.match(r"^poly\s*\[(?P<cs>[^\]]*)\]\s*a=(?P<a>\S+)\s*$", t)
        if not m:
            raise ValueError(f"bad poly descriptor: {text!r}")
        coeffs = [parse_complex(tok) for tok in m.group("cs").split(",")]
        return HenonMap(tuple(coeffs), parse_complex(m.group("a")))
    raise ValueError(f"unknown map descriptor: {text!r}")


def eig2(m) -> tuple:
    """Eigenvalues of a complex 2x2 matrix, stable quadratic formula."""
    a, b, c, d = complex(m[0][0]), complex(m[0][1]), complex(m[1][0]), complex(m[1][1])
    tr = a + d
    det = a * d - b * c
    disc = cmath.sqrt(tr * tr - 4.0 * det)
    # avoid cancellation: pick the larger root first
    if abs(tr + disc) >= abs(tr - disc):
        l1 = (tr + disc) / 2.0
    else:
        l1 = (tr - disc) / 2.0
    l2 = det / l1 if l1 != 0 else tr - l1
    return l1, l2
