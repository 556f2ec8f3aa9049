"""Finite-depth symbolic coding of horseshoe dynamics.

A certified horseshoe meets the bidisc in d vertical strips; recording which
strip each iterate visits conjugates the map to the full shift on d symbols,
up to the finite depth actually computed.  This module builds the strip
labeling, reads off itineraries, and inverts finite words back to points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .certificates import bidisc_radius, label_mask_components
from .henon import Bidisc, HenonMap
from .periodic import _polish


class NotInK(ValueError):
    """An iterate left the bidisc before the requested window was coded."""


class UnresolvedSymbol(ValueError):
    def __init__(self, index: int, reason: str):
        super().__init__(f"unresolved symbol at index {index}: {reason}")
        self.index = index


@dataclass(frozen=True)
class SymbolWord:
    """A finite window of a bi-infinite symbol sequence.

    symbols[offset] is the symbol at time 0; earlier entries are history.
    """

    symbols: tuple[int, ...]
    offset: int = 0

    def __post_init__(self):
        if not self.symbols:
            raise ValueError("empty word")
        if not 0 <= self.offset <= len(self.symbols):
            raise ValueError("offset outside the word")
        if any(s < 0 for s in self.symbols):
            raise ValueError("symbols must be non-negative")

    def __str__(self) -> str:
        text = "".join(str(s) for s in self.symbols)
        return text[: self.offset] + "^" + text[self.offset:]

    @staticmethod
    def parse(text: str) -> "SymbolWord":
        if text.count("^") != 1:
            raise ValueError("word needs exactly one caret marking time 0")
        head, tail = text.split("^")
        return SymbolWord(
            symbols=tuple(int(ch) for ch in head + tail), offset=len(head)
        )

    def times(self) -> range:
        return range(-self.offset, len(self.symbols) - self.offset)

    def at_time(self, t: int) -> int:
        return self.symbols[t + self.offset]

    def minimal_period(self) -> int:
        m = len(self.symbols)
        for q in range(1, m):
            if all(self.symbols[i] == self.symbols[i + q] for i in range(m - q)):
                return q
        return m


@dataclass(frozen=True)
class ComponentLabeling:
    """Strip decomposition of (points staying in the bidisc one step forward).

    Labels ascend with re(x) of the strip centroid, ties broken by im(x).
    Classification is by nearest labeled grid cell in the x coordinate; the
    guard band turns ambiguous queries into errors instead of guesses.
    """

    henon: HenonMap
    bidisc: Bidisc
    d: int
    cells: np.ndarray  # complex coordinates of labeled cells
    labels: np.ndarray  # parallel int labels
    centroids: tuple[complex, ...]
    guard: float

    def _label_of_x(self, x: complex) -> int:
        dist = np.abs(self.cells - x)
        best = int(np.argmin(dist))
        near = dist <= dist[best] + self.guard
        cand = np.unique(self.labels[near])
        if len(cand) > 1:
            raise UnresolvedSymbol(0, f"x={x:.6g} lies in the guard band")
        return int(self.labels[best])

    def _member(self, z: tuple[complex, complex]) -> bool:
        x, y = z
        b = self.bidisc
        if abs(x - b.c1) > b.r1 or abs(y - b.c2) > b.r2:
            return False
        fx, fy = self.henon.apply(z)
        return abs(fx - b.c1) <= b.r1 and abs(fy - b.c2) <= b.r2

    def region(self, z: tuple[complex, complex]) -> int:
        """Label of the strip containing z; z must stay in B one step."""
        if not self._member(z):
            raise NotInK("point leaves the bidisc within one forward step")
        return self._label_of_x(z[0])

    def image_region(self, z: tuple[complex, complex]) -> int:
        """Matched label of the image-side strip containing z.

        The image of strip i is the horizontal strip whose y coordinate is
        an x that belonged to strip i, so the same x classifier applies to y.
        """
        x, y = z
        b = self.bidisc
        px, py = self.henon.apply_inverse(z)
        inside = (
            abs(x - b.c1) <= b.r1
            and abs(y - b.c2) <= b.r2
            and abs(px - b.c1) <= b.r1
            and abs(py - b.c2) <= b.r2
        )
        if not inside:
            raise NotInK("point leaves the bidisc within one backward step")
        return self._label_of_x(y)

    def swapped(self) -> "ComponentLabeling":
        """Relabeling by the order-reversing symbol automorphism."""
        return ComponentLabeling(
            henon=self.henon,
            bidisc=self.bidisc,
            d=self.d,
            cells=self.cells,
            labels=(self.d - 1) - self.labels,
            centroids=tuple(reversed(self.centroids)),
            guard=self.guard,
        )


def build_labeling(
    henon: HenonMap, bidisc: Bidisc | None = None, resolution: int = 192
) -> ComponentLabeling:
    """Sample the one-step-forward slice and label its strips.

    The x-plane slice through the y-disc center is rasterized, its connected
    components counted, and the labels ordered by centroid.  The component
    count must equal the map degree; anything else means the parameters were
    not a certified horseshoe and the labeling would be meaningless.
    """
    if bidisc is None:
        bidisc = Bidisc.round(bidisc_radius(henon))
    if resolution < 16:
        raise ValueError("resolution too coarse to separate strips")
    b = bidisc
    side = np.linspace(-b.r1, b.r1, resolution)
    gx, gy = np.meshgrid(side, side)
    x = b.c1 + gx + 1j * gy
    y0 = b.c2
    fx = henon.poly(x) - henon.a * y0
    mask = (
        (np.abs(x - b.c1) <= b.r1)
        & (np.abs(x - b.c2) <= b.r2)
        & (np.abs(fx - b.c1) <= b.r1)
    )
    labels2d, count = label_mask_components(mask)
    if count != henon.degree:
        raise ValueError(
            f"slice decomposes into {count} pieces, expected degree {henon.degree}; "
            "build the labeling only for certified horseshoe parameters"
        )
    cents = []
    for k in range(count):
        sel = labels2d == k
        cents.append((k, complex(x[sel].mean())))
    cents.sort(key=lambda kc: (kc[1].real, kc[1].imag))
    relabel = {old: new for new, (old, _) in enumerate(cents)}
    flat = labels2d.ravel()
    keep = flat >= 0
    cells = x.ravel()[keep]
    labels = np.array([relabel[int(v)] for v in flat[keep]], dtype=np.int64)
    cell_width = 2.0 * b.r1 / (resolution - 1)
    return ComponentLabeling(
        henon=henon,
        bidisc=bidisc,
        d=count,
        cells=cells,
        labels=labels,
        centroids=tuple(c for _, c in cents),
        guard=2.0 * cell_width,
    )


def itinerary(
    henon: HenonMap,
    z: tuple[complex, complex],
    n_back: int,
    n_fwd: int,
    labeling: ComponentLabeling,
) -> SymbolWord:
    """Symbols of the orbit of z on the window [-n_back, n_fwd]."""
    if n_back < 0 or n_fwd < 0:
        raise ValueError("window sizes must be non-negative")
    cur = (complex(z[0]), complex(z[1]))
    back = []
    w = cur
    for _ in range(n_back):
        w = henon.apply_inverse(w)
        back.append(w)
    orbit = back[::-1] + [cur]
    w = cur
    for _ in range(n_fwd):
        w = henon.apply(w)
        orbit.append(w)
    symbols = []
    for i, point in enumerate(orbit):
        try:
            symbols.append(labeling.region(point))
        except NotInK as exc:
            raise NotInK(
                f"not in K to requested depth: iterate {i - n_back} escapes"
            ) from exc
        except UnresolvedSymbol as exc:
            raise UnresolvedSymbol(i - n_back, str(exc)) from None
    return SymbolWord(symbols=tuple(symbols), offset=n_back)


def _branch_roots(henon: HenonMap, w: complex) -> list[complex]:
    # solutions x of p(x) = w, ordered by (re, im) to match the labeling order
    d = henon.degree
    coeffs = henon.coeffs
    if all(abs(v) == 0 for v in coeffs[1:-1]):
        base = abs(w - coeffs[0]) ** (1.0 / d) * np.exp(
            1j * np.angle(w - coeffs[0]) / d
        )
        roots = [base * np.exp(2j * np.pi * k / d) for k in range(d)]
    else:
        poly = list(coeffs[::-1])
        poly[-1] -= w
        roots = list(np.roots(poly))
    return sorted((complex(r) for r in roots), key=lambda r: (r.real, r.imag))


def _pullback_orbit(
    henon: HenonMap,
    word: SymbolWord,
    ends: tuple[complex, complex],
    iterations: int,
) -> np.ndarray:
    m = len(word.symbols)
    a = henon.a
    left, right = ends
    xs = np.full(m, 0.5 * (left + right), dtype=complex)
    for _ in range(iterations):
        for i in range(m):
            nxt = xs[i + 1] if i + 1 < m else right
            prv = xs[i - 1] if i >= 1 else left
            w = nxt + a * prv
            xs[i] = _branch_roots(henon, w)[word.symbols[i]]
    return xs


def refine_point(
    henon: HenonMap, word: SymbolWord, iterations: int = 40
) -> tuple[tuple[complex, complex], float]:
    """Invert a finite word to the point visiting those strips in order.

    The orbit relation p(x_t) = x_{t+1} + a x_{t-1} is swept repeatedly,
    each position snapped to the root branch its symbol names.  The radius
    is measured, not proven: the spread of the answer over extreme choices
    of the unknowable boundary values, plus the Newton residual when the
    word is periodic and the exact cycle can be polished out.
    """
    if iterations < 1:
        raise ValueError("need at least one sweep")
    for s in word.symbols:
        if s >= henon.degree:
            raise ValueError(f"symbol {s} out of range for degree {henon.degree}")
    bidisc = Bidisc.round(bidisc_radius(henon))
    c1, r1 = bidisc.c1, bidisc.r1
    variants = [
        (c1, c1),
        (c1 + 0.9 * r1, c1 - 0.9 * r1),
        (c1 - 0.9 * r1, c1 + 0.9 * r1),
    ]
    runs = [_pullback_orbit(henon, word, ends, iterations) for ends in variants]

    def anchor(xs: np.ndarray) -> tuple[complex, complex]:
        x0 = xs[word.offset] if word.offset < len(xs) else complex(variants[0][1])
        xm1 = xs[word.offset - 1] if word.offset >= 1 else complex(variants[0][0])
        return complex(x0), complex(xm1)

    points = [anchor(xs) for xs in runs]
    spread = max(
        max(abs(p[0] - q[0]), abs(p[1] - q[1]))
        for p in points
        for q in points
    )
    z = points[0]

    q = word.minimal_period()
    if q <= max(1, len(word.symbols) // 2):
        px, py, res = _polish(
            henon, z[0], z[1], q, 1e-12, 20.0 * max(bidisc.r1, bidisc.r2)
        )
        if res <= 1e-10:
            return (px, py), max(10.0 * res, 1e-13)
    return z, max(spread, 1e-13)
