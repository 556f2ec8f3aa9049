"""Cycle counting and numerical enumeration of periodic points.

The exact side is pure integer arithmetic: the number of points of exact
period n under a degree-d polynomial-type map follows from the divisor-sum
identity sum_{m|n} (exact points of period m) = d^n.  The numerical side is
an independent oracle: damped Newton on F^n - id from a seed lattice, with
minimal periods and multipliers attached.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .certificates import bidisc_radius
from .henon import Bidisc, HenonMap


@dataclass(frozen=True)
class CycleCount:
    period: int
    points: int  # points of exact period `period`, with multiplicity
    cycles: int


@dataclass(frozen=True)
class PeriodicPoint:
    z: tuple[complex, complex]
    period: int  # minimal
    residual: float
    multiplier_eigenvalues: tuple[complex, complex]
    degenerate: bool = False  # near-singular Newton Jacobian: multiplicity unresolved


def _divisors(n: int) -> list[int]:
    out = [m for m in range(1, n // 2 + 1) if n % m == 0]
    out.append(n)
    return out


@lru_cache(maxsize=None)
def _mobius(n: int) -> int:
    if n == 1:
        return 1
    mu, k = 1, n
    p = 2
    while p * p <= k:
        if k % p == 0:
            k //= p
            if k % p == 0:
                return 0
            mu = -mu
        p += 1
    if k > 1:
        mu = -mu
    return mu


def _exact_points_mobius(d: int, n: int) -> int:
    return sum(_mobius(n // m) * d**m for m in _divisors(n))


def _exact_points_recursive(d: int, n: int) -> int:
    # the divisor-sum identity unwound directly, as an independent path
    return d**n - sum(_exact_points_recursive(d, m) for m in _divisors(n)[:-1])


def count_cycles(d: int, n: int) -> CycleCount:
    """Exact count of period-n points and cycles for a degree-d map.

    Plain Python integers throughout, so arbitrarily large n is exact.
    """
    if d < 2:
        raise ValueError("degree must be at least 2")
    if n < 1:
        raise ValueError("period must be at least 1")
    points = _exact_points_mobius(d, n)
    if points != _exact_points_recursive(d, n):
        raise RuntimeError(f"cycle-count cross-check failed at d={d}, n={n}")
    if points % n:
        raise RuntimeError(f"exact period-{n} point count {points} not divisible by {n}")
    return CycleCount(period=n, points=points, cycles=points // n)


# --- numerical enumeration ------------------------------------------------

def _orbit_and_monodromy(henon: HenonMap, x, y, n: int):
    """Apply the map n times, accumulating the product of Jacobians."""
    a = henon.a
    m11 = np.ones_like(x)
    m12 = np.zeros_like(x)
    m21 = np.zeros_like(x)
    m22 = np.ones_like(x)
    for _ in range(n):
        dp = henon.dpoly(x)
        x, y = henon.poly(x) - a * y, x
        # left-multiply by [[dp, -a], [1, 0]]
        m11, m12, m21, m22 = dp * m11 - a * m21, dp * m12 - a * m22, m11, m12
    return x, y, (m11, m12, m21, m22)


def _iterate(henon: HenonMap, x, y, n: int):
    a = henon.a
    for _ in range(n):
        x, y = henon.poly(x) - a * y, x
    return x, y


def _residuals(henon: HenonMap, x, y, n: int):
    fx, fy = _iterate(henon, x, y, n)
    return np.hypot(np.abs(fx - x), np.abs(fy - y))


def _radical_inverse(indices, base: int):
    i = np.asarray(indices, dtype=np.int64).copy()
    out = np.zeros(i.shape)
    scale = 1.0 / base
    while i.max() > 0:
        out += (i % base) * scale
        i //= base
        scale /= base
    return out


def _seed_lattice(henon: HenonMap, bidisc: Bidisc, grid: int):
    xs = np.linspace(-bidisc.r1, bidisc.r1, grid) + bidisc.c1
    ys = np.linspace(-bidisc.r2, bidisc.r2, grid) + bidisc.c2
    gx, gy = np.meshgrid(xs, ys)
    x = gx.ravel().astype(complex)
    y = gy.ravel().astype(complex)
    if any(abs(v.imag) > 0 for v in henon.coeffs) or abs(henon.a.imag) > 0:
        # a real lattice would stay glued to a symmetry slice of a genuinely
        # complex map; one fixed deterministic offset breaks that
        x = x + 0.137j * bidisc.r1
        y = y - 0.093j * bidisc.r2
    return x, y


def _seed_quasirandom(bidisc: Bidisc, count: int):
    # Halton fill of the full polydisc; Newton from a plane of real seeds
    # cannot reach non-real roots of a real map, these seeds can
    idx = np.arange(1, count + 1)
    u = [_radical_inverse(idx, b) for b in (2, 3, 5, 7)]
    x = bidisc.c1 + bidisc.r1 * ((2 * u[0] - 1) + 1j * (2 * u[1] - 1))
    y = bidisc.c2 + bidisc.r2 * ((2 * u[2] - 1) + 1j * (2 * u[3] - 1))
    return x, y


def _seed_patterns(henon: HenonMap, n: int, cap: int = 4096):
    """One seed per symbol pattern, for maps in normal form x^d + c.

    For large |c| the period-n orbits shadow phase patterns of the d-th
    roots of -c, so these seeds start essentially inside the right basins.
    """
    d = henon.degree
    coeffs = henon.coeffs
    if any(abs(v) > 0 for v in coeffs[1:-1]) or d**n > cap:
        return np.empty(0, dtype=complex), np.empty(0, dtype=complex)
    c, a = coeffs[0], henon.a
    zeta = np.exp(2j * np.pi / d)
    ks = np.arange(d**n)
    digits = (ks[:, None] // d ** np.arange(n)[None, :]) % d
    base = abs(c) ** (1.0 / d) if c != 0 else 1.0
    orbit = base * zeta**digits
    # anchor each x_i to its assigned phase and iterate the orbit relation
    # x_i^d = x_{i+1} + a*x_{i-1} - c; a contraction when |c| dominates, and
    # merely a diverse seed cloud when it does not
    with np.errstate(invalid="ignore", divide="ignore"):
        for _ in range(25):
            w = np.roll(orbit, -1, axis=1) + a * np.roll(orbit, 1, axis=1) - c
            root = np.abs(w) ** (1.0 / d) * np.exp(1j * np.angle(w) / d)
            nxt = zeta**digits * root
            if not np.isfinite(nxt).all():
                break
            orbit = nxt
    return orbit[:, 0].copy(), orbit[:, -1].copy()


def enumerate_periodic(
    henon: HenonMap,
    n: int,
    bidisc: Bidisc | None = None,
    grid: int = 24,
    tol: float = 1e-10,
) -> list[PeriodicPoint]:
    """Find the points of period dividing n by damped Newton on F^n - id.

    Seeds are a grid x grid lattice spanning the bidisc.  Converged roots are
    deduplicated, sorted lexicographically on (re x, im x, re y, im y), and
    tagged with their minimal period and the eigenvalues of the monodromy
    over that period.  Near-singular roots (suspected multiplicity) are
    flagged rather than resolved.
    """
    if n < 1:
        raise ValueError("period must be at least 1")
    if grid < 2:
        raise ValueError("need at least a 2x2 seed lattice")
    if bidisc is None:
        bidisc = Bidisc.round(bidisc_radius(henon))
    lx, ly = _seed_lattice(henon, bidisc, grid)
    qx, qy = _seed_quasirandom(bidisc, grid * grid)
    px, py = _seed_patterns(henon, n)
    x = np.concatenate([lx, qx, px])
    y = np.concatenate([ly, qy, py])
    escape = 20.0 * max(bidisc.r1, bidisc.r2)

    with np.errstate(over="ignore", invalid="ignore"):
        x, y, res = _newton_batch(henon, x, y, n, tol, escape)

    ok = np.isfinite(res) & (res <= tol)
    roots_x, roots_y = x[ok], y[ok]
    order = np.lexsort((roots_y.imag, roots_y.real, roots_x.imag, roots_x.real))
    roots_x, roots_y = roots_x[order], roots_y[order]

    dedup = max(10.0 * tol, 1e-8)
    kept: list[tuple[complex, complex]] = []
    for zx, zy in zip(roots_x, roots_y):
        if all(abs(zx - px) + abs(zy - py) > dedup for px, py in kept):
            kept.append((complex(zx), complex(zy)))

    # a found root drags its whole orbit in: every image is a root of the
    # same system, it only needs re-polishing to undo the growth of the
    # floating error under iteration
    pool = list(kept)
    for zx, zy in kept:
        cx, cy = zx, zy
        for _ in range(n - 1):
            cx, cy = henon.apply((cx, cy))
            px, py, pres = _polish(henon, cx, cy, n, tol, escape)
            if pres <= tol:
                pool.append((px, py))
    pool.sort(key=lambda zz: (zz[0].real, zz[0].imag, zz[1].real, zz[1].imag))
    kept = []
    for zx, zy in pool:
        if all(abs(zx - px) + abs(zy - py) > dedup for px, py in kept):
            kept.append((zx, zy))

    out = []
    for zx, zy in kept:
        period = n
        for m in _divisors(n)[:-1]:
            if _residuals(henon, np.array([zx]), np.array([zy]), m)[0] <= dedup:
                period = m
                break
        residual = float(_residuals(henon, np.array([zx]), np.array([zy]), period)[0])
        _, _, mono = _orbit_and_monodromy(
            henon, np.array([zx]), np.array([zy]), period
        )
        m11, m12, m21, m22 = (complex(v[0]) for v in mono)
        tr, dt = m11 + m22, m11 * m22 - m12 * m21
        disc = np.sqrt(complex(tr * tr - 4.0 * dt))
        eigs = ((tr + disc) / 2.0, (tr - disc) / 2.0)
        eigs = tuple(sorted(eigs, key=lambda w: (-abs(w), w.real, w.imag)))
        full = _orbit_and_monodromy(henon, np.array([zx]), np.array([zy]), n)[2]
        dg = np.array(
            [[full[0][0] - 1.0, full[1][0]], [full[2][0], full[3][0] - 1.0]]
        )
        smin = float(np.linalg.svd(dg, compute_uv=False)[-1])
        scale = 1.0 + float(np.abs(dg).max())
        out.append(
            PeriodicPoint(
                z=(zx, zy),
                period=period,
                residual=residual,
                multiplier_eigenvalues=eigs,
                degenerate=smin < 1e-8 * scale,
            )
        )
    return out


def _newton_batch(henon: HenonMap, x, y, n: int, tol: float, escape: float):
    active = np.ones(x.shape, dtype=bool)
    res = _residuals(henon, x, y, n)
    for _ in range(80):
        active &= np.isfinite(res) & (res > tol)
        active &= (np.abs(x) < escape) & (np.abs(y) < escape)
        if not active.any():
            break
        ax, ay = x[active], y[active]
        fx, fy, (m11, m12, m21, m22) = _orbit_and_monodromy(henon, ax, ay, n)
        g1, g2 = fx - ax, fy - ay
        a11, a12, a21, a22 = m11 - 1.0, m12, m21, m22 - 1.0
        det = a11 * a22 - a12 * a21
        bad = np.abs(det) < 1e-300
        det = np.where(bad, 1.0, det)
        dx = -(g1 * a22 - g2 * a12) / det
        dy = -(a11 * g2 - a21 * g1) / det
        dx[bad] = 0.0
        dy[bad] = 0.0

        cur = res[active]
        best_x, best_y, best_res = ax.copy(), ay.copy(), cur.copy()
        todo = np.ones(ax.shape, dtype=bool)
        lam = 1.0
        for _ in range(7):  # backtracking line search, shared across the batch
            tx = ax + lam * dx
            ty = ay + lam * dy
            tres = _residuals(henon, tx, ty, n)
            take = todo & np.isfinite(tres) & (tres <= (1.0 - 0.25 * lam) * cur)
            best_x[take], best_y[take] = tx[take], ty[take]
            best_res[take] = tres[take]
            todo &= ~take
            if not todo.any():
                break
            lam *= 0.5
        # stalled seeds take the full step anyway; they either recover or escape
        best_x[todo] = ax[todo] + dx[todo]
        best_y[todo] = ay[todo] + dy[todo]
        best_res[todo] = _residuals(henon, best_x[todo], best_y[todo], n)
        x[active], y[active] = best_x, best_y
        res[active] = best_res
    return x, y, res


def _polish(henon: HenonMap, zx: complex, zy: complex, n: int, tol: float, escape: float):
    x = np.array([zx])
    y = np.array([zy])
    with np.errstate(over="ignore", invalid="ignore"):
        x, y, res = _newton_batch(henon, x, y, n, tol, escape)
    r = float(res[0]) if np.isfinite(res[0]) else np.inf
    return complex(x[0]), complex(y[0]), r


def cycles_csv(d: int, max_period: int) -> str:
    lines = ["period,points,cycles"]
    for n in range(1, max_period + 1):
        cc = count_cycles(d, n)
        lines.append(f"{cc.period},{cc.points},{cc.cycles}")
    return "\n".join(lines) + "\n"


def periodic_csv(points: list[PeriodicPoint]) -> str:
    lines = ["re(x),im(x),re(y),im(y),period,residual,|mult1|,|mult2|,degenerate"]
    for p in points:
        zx, zy = p.z
        l1, l2 = p.multiplier_eigenvalues
        lines.append(
            f"{zx.real!r},{zx.imag!r},{zy.real!r},{zy.imag!r},"
            f"{p.period},{p.residual:.3e},{float(abs(l1))!r},{float(abs(l2))!r},"
            f"{int(p.degenerate)}"
        )
    return "\n".join(lines) + "\n"
