"""Orbit classification and filled-set rasters.

A point is reported as escaping only when a one-step-verifiable
predicate holds somewhere along its orbit: |x| > R together with
|y| <= |x| forces forward divergence whenever R exceeds the map's
certified escape radius, and the mirrored predicate (|y| > R,
|x| <= |y|) forces backward divergence.  Everything else is only
"bounded to the horizon", never "bounded".
"""

from __future__ import annotations

import cmath
import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .henon import HenonMap

__all__ = [
    "OrbitClass",
    "SliceSpec",
    "RasterResult",
    "classify",
    "classify_grid",
    "render_slice",
    "boundary_mask",
    "write_ppm",
    "write_csv",
]

BOUNDED = -1  # sentinel in raster arrays: not certified within horizon


@dataclass(frozen=True)
class OrbitClass:
    """Escape record for a single point.

    ``forward_escape_time``/``backward_escape_time`` give the first
    iterate index at which the certified escape predicate held, or
    None when the orbit stayed uncertified through ``horizon`` steps.
    """

    forward_escape_time: int | None
    backward_escape_time: int | None
    horizon: int
    radius: float

    @property
    def status(self) -> str:
        fwd = self.forward_escape_time is not None
        bwd = self.backward_escape_time is not None
        if fwd and bwd:
            return "escapes-both"
        if fwd:
            return "escapes-forward"
        if bwd:
            return "escapes-backward"
        return "bounded-to-horizon"

    @property
    def bounded_forward(self) -> bool:
        return self.forward_escape_time is None

    @property
    def bounded_backward(self) -> bool:
        return self.backward_escape_time is None


def _check_radius(henon: HenonMap, radius: float | None) -> float:
    r0 = henon.certified_escape_radius()
    if radius is None:
        return r0 * (1.0 + 1e-9)
    radius = float(radius)
    if not radius > r0 * (1.0 - 1e-12):
        raise ValueError(
            f"radius {radius} is below the certified escape radius {r0:.6g}"
        )
    return radius


def _warn_if_ill_conditioned(henon: HenonMap) -> None:
    if abs(henon.a) < 1e-6:
        warnings.warn(
            "backward iteration divides by a; |a| < 1e-6 makes backward "
            "escape times unreliable",
            RuntimeWarning,
            stacklevel=3,
        )


def classify(
    henon: HenonMap,
    z: tuple[complex, complex],
    radius: float | None = None,
    horizon: int = 100,
) -> OrbitClass:
    """Classify one orbit in both time directions.

    Escape time n means the predicate held at the n-th iterate (n=0 is
    the point itself).  A non-finite iterate also counts: overflow can
    only happen after the true value left every finite bound, which
    puts it past the predicate threshold as well.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    radius = _check_radius(henon, radius)
    _warn_if_ill_conditioned(henon)
    x, y = complex(z[0]), complex(z[1])
    if not (cmath.isfinite(x) and cmath.isfinite(y)):
        raise ValueError("classify requires a finite starting point")

    fwd = _escape_time_scalar(henon, x, y, radius, horizon, forward=True)
    bwd = _escape_time_scalar(henon, x, y, radius, horizon, forward=False)
    return OrbitClass(fwd, bwd, horizon, radius)


def _escape_time_scalar(
    henon: HenonMap,
    x: complex,
    y: complex,
    radius: float,
    horizon: int,
    forward: bool,
) -> int | None:
    for n in range(horizon + 1):
        if not (cmath.isfinite(x) and cmath.isfinite(y)):
            return n
        if forward:
            if abs(x) > radius and abs(y) <= abs(x):
                return n
        else:
            if abs(y) > radius and abs(x) <= abs(y):
                return n
        if n == horizon:
            break
        if forward:
            x, y = henon.poly(x) - henon.a * y, x
        else:
            x, y = y, (henon.poly(y) - x) / henon.a
    return None


def classify_grid(
    henon: HenonMap,
    xs: np.ndarray,
    ys: np.ndarray,
    radius: float | None = None,
    horizon: int = 100,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized classify over arrays of starting coordinates.

    Returns int32 arrays (forward, backward) of escape times with
    ``BOUNDED`` marking points uncertified within the horizon.
    """
    radius = _check_radius(henon, radius)
    _warn_if_ill_conditioned(henon)
    xs = np.asarray(xs, dtype=complex)
    ys = np.asarray(ys, dtype=complex)
    if xs.shape != ys.shape:
        raise ValueError("coordinate arrays must share a shape")
    fwd = _escape_time_grid(henon, xs, ys, radius, horizon, forward=True)
    bwd = _escape_time_grid(henon, xs, ys, radius, horizon, forward=False)
    return fwd, bwd


def _escape_time_grid(
    henon: HenonMap,
    xs: np.ndarray,
    ys: np.ndarray,
    radius: float,
    horizon: int,
    forward: bool,
) -> np.ndarray:
    x = xs.ravel().copy()
    y = ys.ravel().copy()
    times = np.full(x.shape, BOUNDED, dtype=np.int32)
    active = np.ones(x.shape, dtype=bool)
    a = henon.a
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(horizon + 1):
            ax = np.abs(x[active])
            ay = np.abs(y[active])
            bad = ~(np.isfinite(ax) & np.isfinite(ay))
            if forward:
                hit = bad | ((ax > radius) & (ay <= ax))
            else:
                hit = bad | ((ay > radius) & (ax <= ay))
            idx = np.flatnonzero(active)
            times[idx[hit]] = n
            active[idx[hit]] = False
            if n == horizon or not active.any():
                break
            xa = x[active]
            ya = y[active]
            if forward:
                x[active] = henon.poly(xa) - a * ya
                y[active] = xa
            else:
                x[active] = ya
                y[active] = (henon.poly(ya) - xa) / a
    return times.reshape(xs.shape)


@dataclass(frozen=True)
class SliceSpec:
    """A 2D slice of C^2 to rasterize.

    plane "fix_y" scans x with y pinned at ``value``; "fix_x" scans y
    with x pinned; "real_plane" scans real (x, y) pairs.  The window is
    (lo_re, hi_re, lo_im, hi_im) in the scanned coordinate; for
    "real_plane" the axes are re(x) and re(y) instead.
    """

    plane: str = "fix_y"
    value: complex = 0j
    window: tuple[float, float, float, float] = (-3.0, 3.0, -3.0, 3.0)
    resolution: tuple[int, int] = (512, 512)

    def __post_init__(self) -> None:
        if self.plane not in ("fix_y", "fix_x", "real_plane"):
            raise ValueError(f"unknown slice plane {self.plane!r}")
        lo_re, hi_re, lo_im, hi_im = self.window
        if not (lo_re < hi_re and lo_im < hi_im):
            raise ValueError("slice window must have positive extent")
        nx, ny = self.resolution
        if nx < 2 or ny < 2:
            raise ValueError("resolution must be at least 2x2")

    def grids(self) -> tuple[np.ndarray, np.ndarray]:
        """(x, y) complex coordinate arrays of shape (ny, nx).

        Row 0 is the top of the image (largest second axis value), so
        the raster reads like a plot.
        """
        lo_re, hi_re, lo_im, hi_im = self.window
        nx, ny = self.resolution
        u = np.linspace(lo_re, hi_re, nx)
        v = np.linspace(hi_im, lo_im, ny)
        uu, vv = np.meshgrid(u, v)
        if self.plane == "fix_y":
            return uu + 1j * vv, np.full_like(uu, self.value, dtype=complex)
        if self.plane == "fix_x":
            return np.full_like(uu, self.value, dtype=complex), uu + 1j * vv
        return uu.astype(complex), vv.astype(complex)


@dataclass(frozen=True)
class RasterResult:
    spec: SliceSpec
    radius: float
    horizon: int
    forward: np.ndarray = field(repr=False)
    backward: np.ndarray = field(repr=False)

    @property
    def bounded_both(self) -> np.ndarray:
        return (self.forward == BOUNDED) & (self.backward == BOUNDED)


def render_slice(
    henon: HenonMap,
    spec: SliceSpec,
    radius: float | None = None,
    horizon: int = 100,
) -> RasterResult:
    xs, ys = spec.grids()
    fwd, bwd = classify_grid(henon, xs, ys, radius=radius, horizon=horizon)
    return RasterResult(spec, _check_radius(henon, radius), horizon, fwd, bwd)


def boundary_mask(members: np.ndarray) -> np.ndarray:
    """Pixels whose 4-neighborhood mixes membership classes.

    With ``members`` = bounded-both this is the raster stand-in for the
    boundary of the filled invariant set.
    """
    members = np.asarray(members, dtype=bool)
    mixed = np.zeros_like(members)
    for axis in (0, 1):
        for shift in (1, -1):
            rolled = np.roll(members, shift, axis=axis)
            # roll wraps around; mask out the wrapped edge
            edge = [slice(None), slice(None)]
            edge[axis] = 0 if shift == 1 else -1
            valid = np.ones_like(members)
            valid[tuple(edge)] = False
            mixed |= valid & (rolled != members)
    return mixed


# palette: bounded-both is black, escape times shade by direction.
# Channel values depend only on (forward, backward, horizon) so the
# byte stream is reproducible across runs.


def _palette(fwd: np.ndarray, bwd: np.ndarray, horizon: int) -> np.ndarray:
    h = max(horizon, 1)
    f = fwd.astype(np.float64)
    b = bwd.astype(np.float64)
    fe = fwd != BOUNDED
    be = bwd != BOUNDED
    rgb = np.zeros(fwd.shape + (3,), dtype=np.uint8)
    # forward escape brightens red, backward brightens blue, both mix
    fshade = np.where(fe, 255.0 - 155.0 * np.minimum(f, h) / h, 0.0)
    bshade = np.where(be, 255.0 - 155.0 * np.minimum(b, h) / h, 0.0)
    rgb[..., 0] = np.round(fshade).astype(np.uint8)
    rgb[..., 2] = np.round(bshade).astype(np.uint8)
    rgb[..., 1] = np.round(np.minimum(fshade, bshade) * 0.35).astype(np.uint8)
    return rgb


def encode_ppm(rgb: np.ndarray, config_comment: str | None = None) -> bytes:
    """Binary P6 encoding of an (ny, nx, 3) uint8 array; deterministic bytes."""
    ny, nx = rgb.shape[:2]
    head = io.BytesIO()
    head.write(b"P6\n")
    if config_comment:
        for line in config_comment.splitlines():
            head.write(b"# " + line.encode("utf-8") + b"\n")
    head.write(f"{nx} {ny}\n255\n".encode("ascii"))
    head.write(np.ascontiguousarray(rgb, dtype=np.uint8).tobytes())
    return head.getvalue()


def write_ppm(result: RasterResult, config_comment: str | None = None) -> bytes:
    """Binary P6 image of the raster; deterministic bytes."""
    rgb = _palette(result.forward, result.backward, result.horizon)
    return encode_ppm(rgb, config_comment)


def write_csv(
    result: RasterResult, config_comment: str | None = None
) -> str:
    """CSV dump: re(x),im(x),re(y),im(y),fwd,bwd per pixel.

    Escape times are integers; bounded-to-horizon rows carry -1.
    """
    xs, ys = result.spec.grids()
    buf = io.StringIO()
    if config_comment:
        for line in config_comment.splitlines():
            buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["re(x)", "im(x)", "re(y)", "im(y)", "fwd", "bwd"])
    fwd = result.forward.ravel()
    bwd = result.backward.ravel()
    xf = xs.ravel()
    yf = ys.ravel()
    for i in range(xf.size):
        writer.writerow(
            [
                repr(float(xf[i].real)),
                repr(float(xf[i].imag)),
                repr(float(yf[i].real)),
                repr(float(yf[i].imag)),
                int(fwd[i]),
                int(bwd[i]),
            ]
        )
    return buf.getvalue()
