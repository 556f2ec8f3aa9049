"""Horseshoe certificates for generalized Henon maps.

Three cooperating checks, in increasing order of effort:

* ``certify_inequality``: a closed-form sufficient condition in the
  quadratic normal form.  On the part of the bidisc that the map does
  not immediately throw out, |x|^2 >= |c| - R(1+|a|), so the derivative
  cone condition holds as soon as
  ``2*sqrt(|c| - R(1+|a|)) > max(gamma + |a|/gamma, gamma|a| + 1/gamma)``.
* ``certify_cone_sweep``: an adaptive interval sweep that verifies the
  same cone conditions box by box, discarding boxes whose short orbit
  window provably leaves the bidisc.  ``core_steps`` widens that window
  and buys sharper localization than the closed form.
* ``critical_values_escape``: exact clearance of the fold values, the
  degree-d counterpart of the classical disconnectivity condition.

``component_count`` and ``fiber_diameter_decay`` measure the geometry
(number of vertical strips, contraction of nested fibers) on sampled
slices; they are diagnostics, not proofs.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .henon import Bidisc, HenonMap, Verdict, check_quasi_henon_like
from .intervals import Box2, ComplexRect, polyval_rect

__all__ = [
    "ConeField",
    "Certificate",
    "ConeSweepStats",
    "CriticalValueReport",
    "ComponentReport",
    "DecayReport",
    "ALPHA_DEFAULT",
    "bidisc_radius",
    "certify_inequality",
    "inequality_threshold",
    "optimize_aperture",
    "certify_cone_sweep",
    "certify_chain",
    "critical_values_escape",
    "component_count",
    "count_mask_components",
    "fiber_diameter_decay",
]

# smallest alpha strictly above the escape-radius crossover
ALPHA_DEFAULT = 0.5 * (1.0 + 1e-9)


@dataclass(frozen=True)
class ConeField:
    """Aperture of the paired cone families.

    Horizontal cones: gamma*|xi2| < |xi1|.  Vertical cones:
    gamma*|xi1| < |xi2|.  With both families sharing one aperture the
    pair stays transversal for every gamma in (0, 1].
    """

    gamma: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError("cone aperture gamma must lie in (0, 1]")

    def forward_need(self, a_abs: float) -> float:
        return self.gamma + a_abs / self.gamma

    def backward_need(self, a_abs: float) -> float:
        return self.gamma * a_abs + 1.0 / self.gamma

    def need(self, a_abs: float) -> float:
        return max(self.forward_need(a_abs), self.backward_need(a_abs))


@dataclass(frozen=True)
class Certificate:
    method: str
    map: str
    R: float
    alpha: float
    gamma: float
    margin: float
    verdict: Verdict
    boxes: int = 0
    depth: int = 0
    core_steps: int = 0
    detail: str = ""

    def __post_init__(self) -> None:
        if self.verdict is Verdict.YES and not self.margin > 0.0:
            raise ValueError("a yes certificate requires a positive margin")

    def to_json(self, wall_ms: float = 0.0, config: dict | None = None) -> str:
        payload = {
            "method": self.method,
            "map": self.map,
            "R": self.R,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "margin": self.margin,
            "verdict": str(self.verdict),
            "boxes": self.boxes,
            "depth": self.depth,
            "wall_ms": wall_ms,
        }
        if self.core_steps:
            payload["core_steps"] = self.core_steps
        if self.detail:
            payload["detail"] = self.detail
        if config is not None:
            payload["config"] = config
        return json.dumps(payload, indent=2, sort_keys=False)


def bidisc_radius(henon: HenonMap, alpha: float = ALPHA_DEFAULT) -> float:
    """R = alpha*(1 + |a| + sqrt((1+|a|)^2 + 4*S)), S = sum |low coeffs|.

    alpha = 1/2 reproduces the escape radius; any alpha > 1/2 gives a
    bidisc whose complement certifiably escapes.
    """
    if not alpha > 0.5:
        raise ValueError("alpha must exceed 1/2 so that escape is certified")
    s = sum(abs(c) for c in henon.coeffs[:-1])
    t = 1.0 + abs(henon.a)
    return alpha * (t + math.sqrt(t * t + 4.0 * s))


def _localization_floor(henon: HenonMap, radius: float) -> float:
    """|x|^2 on B ∩ F^{-1}(B) is at least |c| - R(1+|a|) (normal form)."""
    return abs(henon.c) - radius * (1.0 + abs(henon.a))


def certify_inequality(
    henon: HenonMap,
    cones: ConeField | float = 1.0,
    alpha: float = ALPHA_DEFAULT,
) -> Certificate:
    """Closed-form cone certificate for the quadratic normal form.

    Yes means: the cone pair of aperture gamma is invariant over the
    radius-R bidisc, so the map is a full 2-shift horseshoe there.  No
    only means this particular inequality failed.
    """
    if isinstance(cones, (int, float)):
        cones = ConeField(float(cones))
    if henon.degree != 2 or not henon.is_normal_form:
        raise ValueError(
            "closed-form certificate requires the quadratic normal form; "
            "use certify_cone_sweep for general maps"
        )
    radius = bidisc_radius(henon, alpha)
    a_abs = abs(henon.a)
    need = cones.need(a_abs)
    floor = _localization_floor(henon, radius)
    if floor > 0.0:
        margin = 2.0 * math.sqrt(floor) - need
    else:
        margin = -need - math.sqrt(-floor)
    verdict = Verdict.YES if margin > 0.0 else Verdict.NO
    return Certificate(
        method="inequality",
        map=henon.descriptor(),
        R=radius,
        alpha=alpha,
        gamma=cones.gamma,
        margin=margin,
        verdict=verdict,
    )


def inequality_threshold(
    a_abs: float, gamma: float = 1.0, alpha: float = ALPHA_DEFAULT
) -> float:
    """Critical |c| above which certify_inequality says yes.

    Solves 2*sqrt(|c| - R(1+|a|)) = need with R = alpha*(w + sqrt(w^2+4|c|)),
    w = 1 + |a|, via one quadratic in u = sqrt(w^2 + 4|c|).
    """
    need = ConeField(gamma).need(a_abs)
    w = 1.0 + a_abs
    t2 = need * need / 4.0
    # |c| = t2 + alpha*w^2 + alpha*w*u and u^2 = w^2 + 4|c|
    b = 4.0 * alpha * w
    cconst = w * w + 4.0 * t2 + 4.0 * alpha * w * w
    u = (b + math.sqrt(b * b + 4.0 * cconst)) / 2.0
    return (u * u - w * w) / 4.0


# --- adaptive interval sweep ------------------------------------------


@dataclass
class ConeSweepStats:
    boxes: int = 0
    depth: int = 0
    undecided: list = field(default_factory=list)


_COLS = 8  # xre_lo, xre_hi, xim_lo, xim_hi, yre_lo, yre_hi, yim_lo, yim_hi


def _initial_box(bidisc: Bidisc) -> np.ndarray:
    c1, c2, r1, r2 = bidisc.c1, bidisc.c2, bidisc.r1, bidisc.r2
    return np.array(
        [[
            c1.real - r1, c1.real + r1, c1.imag - r1, c1.imag + r1,
            c2.real - r2, c2.real + r2, c2.imag - r2, c2.imag + r2,
        ]]
    )


def _rects(boxes: np.ndarray) -> tuple[ComplexRect, ComplexRect]:
    x = ComplexRect(boxes[:, 0], boxes[:, 1], boxes[:, 2], boxes[:, 3])
    y = ComplexRect(boxes[:, 4], boxes[:, 5], boxes[:, 6], boxes[:, 7])
    return x, y


def _rect_misses_disc(rect: ComplexRect, center: complex, radius: float) -> np.ndarray:
    """True where the rect provably misses the closed disc."""
    dre = np.maximum(np.maximum(rect.re_lo - center.real, center.real - rect.re_hi), 0.0)
    dim = np.maximum(np.maximum(rect.im_lo - center.imag, center.imag - rect.im_hi), 0.0)
    # outward slack keeps a touching box alive
    return dre * dre + dim * dim > (radius * radius) * (1.0 + 1e-12) + 1e-300


def _window_misses(
    henon: HenonMap,
    x: ComplexRect,
    y: ComplexRect,
    bidisc: Bidisc,
    steps_fwd: int,
    steps_bwd: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-box certified-miss flags for F^j over j in [-steps_bwd, steps_fwd].

    Returns (miss_at[j] for j=1..steps_fwd, miss_at[-j] for j=1..steps_bwd)
    stacked as arrays of shape (steps, n).  j=0 membership is handled by
    the caller (boxes outside B are dropped up front).
    """
    n = x.re_lo.shape[0] if np.ndim(x.re_lo) else 1
    miss_f = np.zeros((steps_fwd, n), dtype=bool)
    miss_b = np.zeros((steps_bwd, n), dtype=bool)

    def freeze(rect: ComplexRect, dead: np.ndarray, center: complex) -> ComplexRect:
        # missed boxes are settled; pin them at the center so longer
        # windows cannot overflow
        return ComplexRect(
            np.where(dead, center.real, rect.re_lo),
            np.where(dead, center.real, rect.re_hi),
            np.where(dead, center.imag, rect.im_lo),
            np.where(dead, center.imag, rect.im_hi),
        )

    with np.errstate(over="ignore", invalid="ignore"):
        cur = Box2(x, y)
        dead = np.zeros(n, dtype=bool)
        for j in range(steps_fwd):
            cur = henon.apply_box(cur)
            miss_f[j] = dead | _rect_misses_disc(
                cur.x, bidisc.c1, bidisc.r1
            ) | _rect_misses_disc(cur.y, bidisc.c2, bidisc.r2)
            dead = miss_f[j]
            if dead.all():
                miss_f[j + 1 :] = True
                break
            cur = Box2(
                freeze(cur.x, dead, bidisc.c1), freeze(cur.y, dead, bidisc.c2)
            )
        cur = Box2(x, y)
        dead = np.zeros(n, dtype=bool)
        for j in range(steps_bwd):
            cur = henon.apply_inverse_box(cur)
            miss_b[j] = dead | _rect_misses_disc(
                cur.x, bidisc.c1, bidisc.r1
            ) | _rect_misses_disc(cur.y, bidisc.c2, bidisc.r2)
            dead = miss_b[j]
            if dead.all():
                miss_b[j + 1 :] = True
                break
            cur = Box2(
                freeze(cur.x, dead, bidisc.c1), freeze(cur.y, dead, bidisc.c2)
            )
    return miss_f, miss_b


def _point_window_inside(
    henon: HenonMap,
    z: tuple[complex, complex],
    bidisc: Bidisc,
    steps_fwd: int,
    steps_bwd: int,
    slack: float,
) -> bool:
    """True when every window iterate of the point sits strictly inside."""

    def well_inside(w: tuple[complex, complex]) -> bool:
        return (
            abs(w[0] - bidisc.c1) < bidisc.r1 - slack
            and abs(w[1] - bidisc.c2) < bidisc.r2 - slack
        )

    if not well_inside(z):
        return False
    w = z
    for _ in range(steps_fwd):
        w = henon.apply(w)
        if not well_inside(w):
            return False
    w = z
    for _ in range(steps_bwd):
        w = henon.apply_inverse(w)
        if not well_inside(w):
            return False
    return True


def certify_cone_sweep(
    henon: HenonMap,
    bidisc: Bidisc | None = None,
    cones: ConeField | float = 1.0,
    max_depth: int = 12,
    core_steps: int = 0,
    alpha: float = ALPHA_DEFAULT,
    check_boundary: bool = True,
    boundary_samples: int = 4096,
    workers: int | None = None,
    deadline: float | None = None,
) -> Certificate:
    """Adaptive verified sweep of the cone conditions over the bidisc.

    A box owes the forward cone condition unless some iterate F^j of it,
    j in [-core_steps, core_steps+1], provably leaves the bidisc; dually
    backward with j in [-(core_steps+1), core_steps].  Boxes failing
    their obligations are bisected along the widest axis (ties broken
    re(x), im(x), re(y), im(y)) until every axis has been halved
    max_depth times.  Undecided boxes leave the verdict unknown; a
    midpoint whose window provably stays inside while the derivative
    bound fails flips the verdict to a definite no.
    """
    if isinstance(cones, (int, float)):
        cones = ConeField(float(cones))
    if bidisc is None:
        bidisc = Bidisc.round(bidisc_radius(henon, alpha))
    if workers is None:
        workers = int(os.environ.get("HORSESHOE_WORKERS", "1"))
    a_abs = abs(henon.a)
    need_f = cones.forward_need(a_abs)
    need_b = cones.backward_need(a_abs)
    radius = max(bidisc.r1, bidisc.r2)
    slack = 1e-9 * (1.0 + radius)

    margins: list[float] = [math.inf]
    boundary_detail = ""
    if check_boundary:
        report = check_quasi_henon_like(
            henon, bidisc, orientation="horizontal", samples=boundary_samples
        )
        if report.verdict is Verdict.NO:
            return Certificate(
                method="cone_sweep",
                map=henon.descriptor(),
                R=radius,
                alpha=alpha,
                gamma=cones.gamma,
                margin=report.margin,
                verdict=Verdict.NO,
                core_steps=core_steps,
                detail="boundary crossing condition fails",
            )
        if report.verdict is Verdict.UNKNOWN:
            boundary_detail = "boundary crossing condition unresolved"
        else:
            margins.append(report.margin)

    stats = ConeSweepStats()
    queue = _initial_box(bidisc)
    splits = np.zeros((1, 4), dtype=np.int16)
    dcoeffs = henon._dcoeffs()
    steps_f = core_steps + 1
    steps_b = core_steps + 1
    no_margin: float | None = None

    def process(
        boxes: np.ndarray, box_splits: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, float, float | None, list]:
        x, y = _rects(boxes)
        drop = _rect_misses_disc(x, bidisc.c1, bidisc.r1) | _rect_misses_disc(
            y, bidisc.c2, bidisc.r2
        )
        keep = ~drop
        boxes = boxes[keep]
        box_splits = box_splits[keep]
        if boxes.shape[0] == 0:
            return boxes[:0], box_splits[:0], math.inf, None, []
        x, y = _rects(boxes)
        miss_f, miss_b = _window_misses(henon, x, y, bidisc, steps_f, steps_b)
        # forward obligation: z and F(z) in the core, i.e. the window
        # [-k, k+1] never provably leaves.  backward mirrors it.
        fwd_active = ~(miss_f[: core_steps + 1].any(axis=0) | miss_b[:core_steps].any(axis=0))
        bwd_active = ~(miss_f[:core_steps].any(axis=0) | miss_b[: core_steps + 1].any(axis=0))
        jx = polyval_rect(dcoeffs, x).min_abs()
        jy = polyval_rect(dcoeffs, y).min_abs()
        ok_f = jx > need_f
        ok_b = jy > need_b
        certified = (~fwd_active | ok_f) & (~bwd_active | ok_b)
        local = math.inf
        act_f = certified & fwd_active
        act_b = certified & bwd_active
        if act_f.any():
            local = min(local, float(np.min(jx[act_f]) - need_f))
        if act_b.any():
            local = min(local, float(np.min(jy[act_b]) - need_b))
        pending = ~certified
        bad = None
        probes: list = []
        if pending.any():
            # try to convict a midpoint before splitting further
            mid_x = (boxes[pending, 0] + boxes[pending, 1]) / 2 + 1j * (
                (boxes[pending, 2] + boxes[pending, 3]) / 2
            )
            mid_y = (boxes[pending, 4] + boxes[pending, 5]) / 2 + 1j * (
                (boxes[pending, 6] + boxes[pending, 7]) / 2
            )
            dpx = np.abs(henon.dpoly(mid_x))
            dpy = np.abs(henon.dpoly(mid_y))
            sus = (dpx < need_f - slack) | (dpy < need_b - slack)
            for i in np.flatnonzero(sus)[:64]:
                z = (complex(mid_x[i]), complex(mid_y[i]))
                deficit = min(float(dpx[i]) - need_f, float(dpy[i]) - need_b)
                if float(dpx[i]) - need_f < -slack and _point_window_inside(
                    henon, z, bidisc, steps_f, steps_b - 1, slack
                ):
                    bad = deficit
                    probes.append(z)
                    break
                if float(dpy[i]) - need_b < -slack and _point_window_inside(
                    henon, z, bidisc, steps_f - 1, steps_b, slack
                ):
                    bad = deficit
                    probes.append(z)
                    break
        return boxes[pending], box_splits[pending], local, bad, probes

    while queue.shape[0] > 0:
        stats.boxes += queue.shape[0]
        if workers > 1 and queue.shape[0] >= 4 * workers:
            chunks = np.array_split(np.arange(queue.shape[0]), workers)
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(
                    pool.map(lambda ix: process(queue[ix], splits[ix]), chunks)
                )
        else:
            parts = [process(queue, splits)]
        rem_boxes = [p[0] for p in parts]
        rem_splits = [p[1] for p in parts]
        margins.extend(p[2] for p in parts)
        for p in parts:
            if p[3] is not None and (no_margin is None or p[3] < no_margin):
                no_margin = p[3]
        pending = np.concatenate(rem_boxes) if rem_boxes else queue[:0]
        psplits = np.concatenate(rem_splits) if rem_splits else splits[:0]
        if no_margin is not None:
            return Certificate(
                method="cone_sweep",
                map=henon.descriptor(),
                R=radius,
                alpha=alpha,
                gamma=cones.gamma,
                margin=no_margin,
                verdict=Verdict.NO,
                boxes=stats.boxes,
                depth=stats.depth,
                core_steps=core_steps,
                detail="derivative bound fails at a core point",
            )
        if pending.shape[0] == 0:
            break
        # split along the widest axis not yet at depth; tie-break order
        # is the column order re(x), im(x), re(y), im(y)
        widths = np.stack(
            [
                pending[:, 1] - pending[:, 0],
                pending[:, 3] - pending[:, 2],
                pending[:, 5] - pending[:, 4],
                pending[:, 7] - pending[:, 6],
            ],
            axis=1,
        )
        widths = np.where(psplits >= max_depth, -1.0, widths)
        axis = np.argmax(widths, axis=1)
        splittable = widths[np.arange(len(axis)), axis] > 0.0
        stuck = pending[~splittable]
        if stuck.shape[0] > 0:
            stats.undecided.extend(
                (
                    complex((b[0] + b[1]) / 2, (b[2] + b[3]) / 2),
                    complex((b[4] + b[5]) / 2, (b[6] + b[7]) / 2),
                )
                for b in stuck[:16]
            )
        pending = pending[splittable]
        psplits = psplits[splittable]
        axis = axis[splittable]
        if pending.shape[0] == 0:
            if stats.undecided:
                break
            break
        if deadline is not None and time.monotonic() > deadline:
            stats.undecided.extend(
                (
                    complex((b[0] + b[1]) / 2, (b[2] + b[3]) / 2),
                    complex((b[4] + b[5]) / 2, (b[6] + b[7]) / 2),
                )
                for b in pending[:16]
            )
            break
        lo_col = 2 * axis
        hi_col = 2 * axis + 1
        rows = np.arange(pending.shape[0])
        mids = (pending[rows, lo_col] + pending[rows, hi_col]) / 2.0
        left = pending.copy()
        right = pending.copy()
        left[rows, hi_col] = mids
        right[rows, lo_col] = mids
        psplits = psplits.copy()
        psplits[rows, axis] += 1
        stats.depth = max(stats.depth, int(psplits.max()))
        queue = np.concatenate([left, right])
        splits = np.concatenate([psplits, psplits])

    if stats.undecided:
        detail = boundary_detail or f"{len(stats.undecided)}+ boxes undecided at depth cap"
        return Certificate(
            method="cone_sweep",
            map=henon.descriptor(),
            R=radius,
            alpha=alpha,
            gamma=cones.gamma,
            margin=0.0,
            verdict=Verdict.UNKNOWN,
            boxes=stats.boxes,
            depth=stats.depth,
            core_steps=core_steps,
            detail=detail,
        )
    if boundary_detail:
        return Certificate(
            method="cone_sweep",
            map=henon.descriptor(),
            R=radius,
            alpha=alpha,
            gamma=cones.gamma,
            margin=0.0,
            verdict=Verdict.UNKNOWN,
            boxes=stats.boxes,
            depth=stats.depth,
            core_steps=core_steps,
            detail=boundary_detail,
        )
    return Certificate(
        method="cone_sweep",
        map=henon.descriptor(),
        R=radius,
        alpha=alpha,
        gamma=cones.gamma,
        margin=float(min(margins)),
        verdict=Verdict.YES,
        boxes=stats.boxes,
        depth=stats.depth,
        core_steps=core_steps,
    )


def optimize_aperture(
    henon: HenonMap,
    time_budget: float = 10.0,
    max_core_steps: int = 4,
    sweep_depth: int = 18,
) -> tuple[float, float, Certificate]:
    """Search apertures, then escalate the sweep when algebra is not enough.

    Phase one scans a (gamma, alpha) grid and polishes the best cell by
    golden-section on each axis; the closed-form margin is exact, so a
    positive value ends the search.  Phase two reruns the interval sweep
    with growing core windows until the budget runs out.
    """
    start = time.monotonic()
    if henon.degree != 2 or not henon.is_normal_form:
        raise ValueError("aperture optimization expects the quadratic normal form")

    def margin_at(gamma: float, alpha: float) -> float:
        return certify_inequality(henon, ConeField(gamma), alpha).margin

    gammas = np.linspace(0.2, 1.0, 17)
    alphas = np.linspace(ALPHA_DEFAULT, 0.8, 13)
    best = max(
        ((margin_at(g, al), g, al) for g in gammas for al in alphas),
        key=lambda t: t[0],
    )
    _, g0, a0 = best

    phi = (math.sqrt(5.0) - 1.0) / 2.0

    def golden(fun, lo: float, hi: float, iters: int = 40) -> float:
        c = hi - phi * (hi - lo)
        d = lo + phi * (hi - lo)
        fc, fd = fun(c), fun(d)
        for _ in range(iters):
            if fc >= fd:
                hi, d, fd = d, c, fc
                c = hi - phi * (hi - lo)
                fc = fun(c)
            else:
                lo, c, fc = c, d, fd
                d = lo + phi * (hi - lo)
                fd = fun(d)
        return (lo + hi) / 2.0

    g1 = golden(lambda g: margin_at(g, a0), max(0.05, g0 - 0.1), min(1.0, g0 + 0.1))
    a1 = golden(
        lambda al: margin_at(g1, al), ALPHA_DEFAULT, min(0.8, a0 + 0.05)
    )
    if margin_at(g1, a1) < margin_at(g1, ALPHA_DEFAULT):
        a1 = ALPHA_DEFAULT
    cert = certify_inequality(henon, ConeField(g1), a1)
    if cert.verdict is Verdict.YES:
        return g1, a1, cert

    # the sweep needs breathing room: at alpha -> 1/2 the outer fixed
    # point sits exactly on the bidisc boundary and the crossing check
    # cannot resolve
    best_cert = cert
    for k in range(1, max_core_steps + 1):
        remaining = time_budget - (time.monotonic() - start)
        if remaining <= 0.5:
            break
        sweep = certify_cone_sweep(
            henon,
            cones=ConeField(1.0),
            max_depth=sweep_depth,
            core_steps=k,
            alpha=0.505,
            deadline=start + time_budget,
        )
        if sweep.verdict is Verdict.YES:
            return sweep.gamma, sweep.alpha, sweep
        # a definite no only convicts this core window; deeper windows
        # shrink the obligation set, so keep escalating
        best_cert = sweep
    return best_cert.gamma, best_cert.alpha, best_cert


def certify_chain(
    henon: HenonMap,
    alpha: float = ALPHA_DEFAULT,
    gamma: float = 1.0,
    max_depth: int = 14,
    slices: int = 5,
    resolution: int = 96,
) -> dict:
    """Inequality, sweep, and strip count run in sequence on one bidisc."""
    ineq = certify_inequality(henon, ConeField(gamma), alpha)
    sweep = certify_cone_sweep(
        henon, cones=ConeField(gamma), max_depth=max_depth, alpha=alpha
    )
    comp = component_count(
        henon,
        Bidisc.round(bidisc_radius(henon, alpha)),
        slices=slices,
        resolution=resolution,
    )
    return {"inequality": ineq, "cone_sweep": sweep, "components": comp}


# --- exact fold-value clearance ---------------------------------------


@dataclass(frozen=True)
class CriticalValueReport:
    escapes: bool
    margin: float
    critical_points: tuple[complex, ...]


def critical_values_escape(henon: HenonMap, bidisc: Bidisc) -> CriticalValueReport:
    """Do all fold values leave the bidisc in one step, for every y?

    For a critical point w of p the first image coordinate is
    p(w) - a*y; it avoids the x-disc for every y in the y-disc exactly
    when |p(w) - c1 - a*c2| > r1 + |a|*r2.  The same quantity controls
    the backward direction, so one margin decides both.
    """
    dcs = henon._dcoeffs()
    crits = np.roots(list(reversed(dcs)))
    vals = henon.poly(np.asarray(crits, dtype=complex))
    q = np.abs(vals - henon.a * bidisc.c2 - bidisc.c1)
    margin = float(np.min(q) - (bidisc.r1 + abs(henon.a) * bidisc.r2))
    return CriticalValueReport(
        escapes=margin > 0.0,
        margin=margin,
        critical_points=tuple(complex(w) for w in np.atleast_1d(crits)),
    )


# --- component counting ------------------------------------------------


def label_mask_components(mask: np.ndarray) -> tuple[np.ndarray, int]:
    """4-connected components of a boolean grid, by union-find.

    Returns an int array with component ids 0..count-1 (-1 off the mask),
    numbered in scan order of their first cell.
    """
    mask = np.asarray(mask, dtype=bool)
    ny, nx = mask.shape
    parent = np.arange(ny * nx, dtype=np.int64)

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    idx = np.arange(ny * nx).reshape(ny, nx)
    both = mask[:, 1:] & mask[:, :-1]
    for i, j in zip(idx[:, :-1][both].ravel(), idx[:, 1:][both].ravel()):
        union(int(i), int(j))
    both = mask[1:, :] & mask[:-1, :]
    for i, j in zip(idx[:-1, :][both].ravel(), idx[1:, :][both].ravel()):
        union(int(i), int(j))
    labels = np.full((ny, nx), -1, dtype=np.int64)
    name: dict[int, int] = {}
    for i in idx[mask].ravel():
        r = find(int(i))
        if r not in name:
            name[r] = len(name)
        labels[np.unravel_index(int(i), (ny, nx))] = name[r]
    return labels, len(name)


def count_mask_components(mask: np.ndarray) -> int:
    return label_mask_components(mask)[1]


@dataclass(frozen=True)
class ComponentReport:
    count: int | None
    per_slice: tuple[int, ...]
    slice_values: tuple[complex, ...]
    direction: str
    unresolved: bool

    def __bool__(self) -> bool:  # truthy when resolved
        return not self.unresolved


def _slice_values(bidisc: Bidisc, direction: str, slices: int) -> list[complex]:
    # interior sample of the transversal coordinate: center plus a ring
    center = bidisc.c1 if direction == "fwd" else bidisc.c2
    radius = (bidisc.r1 if direction == "fwd" else bidisc.r2) * 0.6
    vals = [center]
    for i in range(max(0, slices - 1)):
        ang = 2.0 * math.pi * i / max(1, slices - 1)
        vals.append(center + radius * complex(math.cos(ang), math.sin(ang)))
    return vals[:slices]


def component_count(
    henon: HenonMap,
    bidisc: Bidisc | None = None,
    direction: str = "fwd",
    slices: int = 5,
    resolution: int = 96,
) -> ComponentReport:
    """Strip count of F(B) ∩ B (fwd) or F^{-1}(B) ∩ B (bwd) on 2D slices.

    fwd: fix the image x-coordinate, scan the y-plane; membership of y
    means (y, (p(y)-x)/a) lands back in B.  bwd: fix y, scan x with
    membership |p(x)-a*y-c1| <= r1.  A horseshoe of degree d shows d
    strips in every slice; disagreeing slices mark the report
    unresolved.
    """
    if bidisc is None:
        bidisc = Bidisc.round(bidisc_radius(henon))
    if direction not in ("fwd", "bwd"):
        raise ValueError("direction must be 'fwd' or 'bwd'")
    values = _slice_values(bidisc, direction, slices)
    counts = []
    for v in values:
        if direction == "fwd":
            # slice of B ∩ F(B) at x = v: y-plane region
            cc, rr = bidisc.c2, bidisc.r2
            u = np.linspace(cc.real - rr, cc.real + rr, resolution)
            w = np.linspace(cc.imag - rr, cc.imag + rr, resolution)
            uu, ww = np.meshgrid(u, w)
            yy = uu + 1j * ww
            in_disc = np.abs(yy - cc) <= rr
            pre_x = yy
            pre_y = (henon.poly(yy) - v) / henon.a
            mask = (
                in_disc
                & (np.abs(pre_x - bidisc.c1) <= bidisc.r1)
                & (np.abs(pre_y - bidisc.c2) <= bidisc.r2)
            )
        else:
            cc, rr = bidisc.c1, bidisc.r1
            u = np.linspace(cc.real - rr, cc.real + rr, resolution)
            w = np.linspace(cc.imag - rr, cc.imag + rr, resolution)
            uu, ww = np.meshgrid(u, w)
            xx = uu + 1j * ww
            in_disc = np.abs(xx - cc) <= rr
            img_x = henon.poly(xx) - henon.a * v
            mask = (
                in_disc
                & (np.abs(img_x - bidisc.c1) <= bidisc.r1)
                & (np.abs(xx - bidisc.c2) <= bidisc.r2)
            )
        counts.append(count_mask_components(mask))
    agreed = len(set(counts)) == 1
    return ComponentReport(
        count=counts[0] if agreed else None,
        per_slice=tuple(counts),
        slice_values=tuple(values),
        direction=direction,
        unresolved=not agreed,
    )


# --- fiber diameter decay ----------------------------------------------


@dataclass(frozen=True)
class DecayReport:
    depths: tuple[int, ...]
    diameters: tuple[float, ...]
    counts: tuple[int, ...]
    ratios: tuple[float, ...]
    contraction: float
    expected_counts: tuple[int, ...]

    @property
    def geometric(self) -> bool:
        return bool(self.ratios) and max(self.ratios) < 1.0


def _surviving_cells(
    henon: HenonMap,
    cells: np.ndarray,
    y_value: complex,
    bidisc: Bidisc,
    steps: int,
) -> np.ndarray:
    """Keep cells (rects in the x-plane) possibly staying in B for
    `steps` forward iterations."""
    n = cells.shape[0]
    x = ComplexRect(cells[:, 0], cells[:, 1], cells[:, 2], cells[:, 3])
    alive = ~_rect_misses_disc(x, bidisc.c1, bidisc.r1)
    if abs(y_value - bidisc.c2) > bidisc.r2:
        return np.zeros(n, dtype=bool)
    cy = ComplexRect(
        np.full(n, y_value.real),
        np.full(n, y_value.real),
        np.full(n, y_value.imag),
        np.full(n, y_value.imag),
    )
    cur = Box2(x, cy)
    for _ in range(steps):
        cur = henon.apply_box(cur)
        alive &= ~(
            _rect_misses_disc(cur.x, bidisc.c1, bidisc.r1)
            | _rect_misses_disc(cur.y, bidisc.c2, bidisc.r2)
        )
        if not alive.any():
            break
    return alive


def _split_cells(cells: np.ndarray) -> np.ndarray:
    re_mid = (cells[:, 0] + cells[:, 1]) / 2.0
    im_mid = (cells[:, 2] + cells[:, 3]) / 2.0
    out = np.empty((cells.shape[0] * 4, 4))
    out[0::4] = np.stack([cells[:, 0], re_mid, cells[:, 2], im_mid], axis=1)
    out[1::4] = np.stack([re_mid, cells[:, 1], cells[:, 2], im_mid], axis=1)
    out[2::4] = np.stack([cells[:, 0], re_mid, im_mid, cells[:, 3]], axis=1)
    out[3::4] = np.stack([re_mid, cells[:, 1], im_mid, cells[:, 3]], axis=1)
    return out


def _cluster_cells(cells: np.ndarray) -> list[np.ndarray]:
    """Group cells into connected clusters (overlap or touch joins)."""
    n = cells.shape[0]
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    # sweep by re-interval overlap to avoid the full quadratic loop
    order = np.argsort(cells[:, 0])
    tol = 1e-12 * (1.0 + float(np.max(np.abs(cells))))
    for ii in range(n):
        i = order[ii]
        for jj in range(ii + 1, n):
            j = order[jj]
            if cells[j, 0] > cells[i, 1] + tol:
                break
            if (
                cells[i, 2] <= cells[j, 3] + tol
                and cells[j, 2] <= cells[i, 3] + tol
            ):
                ri, rj = find(int(i)), find(int(j))
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [cells[np.array(g)] for g in groups.values()]


def fiber_diameter_decay(
    henon: HenonMap,
    bidisc: Bidisc | None = None,
    depth: int = 6,
    y_value: complex | None = None,
    initial: int = 48,
) -> DecayReport:
    """Track the enclosure of {x : F^m(x, y) in B, 0 <= m <= n} as n grows.

    The set splits into d^n clusters whose certified enclosures shrink
    geometrically in a horseshoe; the largest observed step ratio
    estimates the contraction factor.
    """
    if bidisc is None:
        bidisc = Bidisc.round(bidisc_radius(henon))
    if y_value is None:
        y_value = bidisc.c2
    d = henon.degree
    lo_re, hi_re = bidisc.c1.real - bidisc.r1, bidisc.c1.real + bidisc.r1
    lo_im, hi_im = bidisc.c1.imag - bidisc.r1, bidisc.c1.imag + bidisc.r1
    edges_re = np.linspace(lo_re, hi_re, initial + 1)
    edges_im = np.linspace(lo_im, hi_im, initial + 1)
    cells = np.array(
        [
            (edges_re[i], edges_re[i + 1], edges_im[j], edges_im[j + 1])
            for i in range(initial)
            for j in range(initial)
        ]
    )
    depths: list[int] = []
    diameters: list[float] = []
    counts: list[int] = []
    for n in range(1, depth + 1):
        alive = _surviving_cells(henon, cells, y_value, bidisc, n)
        cells = cells[alive]
        if cells.shape[0] == 0:
            break
        # refine until the cluster count is mesh-independent: one more
        # halving must not change it (gaps between fibers are uneven,
        # so a fixed width target is not reliable)
        count = len(_cluster_cells(cells))
        for _ in range(10):
            if cells.shape[0] > 300_000:
                break
            finer = _split_cells(cells)
            alive = _surviving_cells(henon, finer, y_value, bidisc, n)
            finer = finer[alive]
            finer_count = len(_cluster_cells(finer))
            stable = finer_count == count
            cells, count = finer, finer_count
            if stable:
                break
        clusters = _cluster_cells(cells)
        diam = 0.0
        for cl in clusters:
            w = float(np.max(cl[:, 1]) - np.min(cl[:, 0]))
            h = float(np.max(cl[:, 3]) - np.min(cl[:, 2]))
            diam = max(diam, math.hypot(w, h))
        depths.append(n)
        diameters.append(diam)
        counts.append(len(clusters))
    ratios = tuple(
        diameters[i + 1] / diameters[i] for i in range(len(diameters) - 1)
    )
    return DecayReport(
        depths=tuple(depths),
        diameters=tuple(diameters),
        counts=tuple(counts),
        ratios=ratios,
        contraction=max(ratios) if ratios else math.nan,
        expected_counts=tuple(d**n for n in depths),
    )
