"""Command line front end.

One executable, seven subcommands:

    certify     cone certificates (closed form, verified sweep, or search)
    cycles      exact cycle counts per period for a degree-d horseshoe
    enumerate   periodic points of the map by damped Newton
    itinerary   symbol word of a finite orbit window
    slice       escape-time raster of a 2D slice, PPM and optional CSV
    homoclinic  saddle -> manifolds -> transverse crossing -> chart -> cert
    decay       fiber enclosure diameters under backward refinement

Exit codes: 0 success or verdict yes, 1 definite no, 2 unknown or
inconclusive, 64 usage error.  Every artifact embeds the parsed run
configuration; reruns with the same configuration are byte identical,
so wall-clock timing is reported on stderr instead of inside artifacts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from .certificates import (
    ALPHA_DEFAULT,
    ConeField,
    certify_cone_sweep,
    certify_inequality,
    fiber_diameter_decay,
    optimize_aperture,
)
from .henon import Bidisc, HenonMap, Verdict, format_complex, parse_complex
from .homoclinic import build_horseshoe, find_homoclinic, find_saddle, parametrize_manifold
from .invariant_sets import (
    SliceSpec,
    _palette,
    encode_ppm,
    render_slice,
    write_csv,
    write_ppm,
)
from .periodic import cycles_csv, enumerate_periodic, periodic_csv
from .symbolic import NotInK, UnresolvedSymbol, build_labeling, itinerary

EX_OK = 0
EX_NO = 1
EX_UNKNOWN = 2
EX_USAGE = 64


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad flags; the contract says 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _verdict_code(verdict: Verdict) -> int:
    if verdict == Verdict.YES:
        return EX_OK
    if verdict == Verdict.NO:
        return EX_NO
    return EX_UNKNOWN


def _map_from(args) -> HenonMap:
    a = parse_complex(args.a)
    if getattr(args, "coeffs", None):
        coeffs = tuple(parse_complex(t) for t in args.coeffs.split(","))
        return HenonMap(coeffs, a)
    if args.c is None:
        raise ValueError("a map needs --c (with optional --degree) or --coeffs")
    c = parse_complex(args.c)
    degree = getattr(args, "degree", None) or 2
    return HenonMap.normal_form(degree, a, c)


def _map_config(args) -> dict:
    cfg = {"a": args.a}
    if getattr(args, "coeffs", None):
        cfg["coeffs"] = args.coeffs
    else:
        cfg["c"] = args.c
        if getattr(args, "degree", None):
            cfg["degree"] = args.degree
    return cfg


def _run_config(args, henon: HenonMap | None, keys: tuple[str, ...]) -> dict:
    """Flat dict of the knobs that determined this run, fixed key order."""
    cfg: dict = {"subcommand": args.cmd}
    if henon is not None:
        cfg["map"] = henon.descriptor()
        cfg.update(_map_config(args))
    for key in keys:
        cfg[key] = getattr(args, key)
    cfg["seed"] = args.seed
    cfg["out"] = getattr(args, "out", None) or "-"
    return cfg


def _emit_text(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _comment(cfg: dict) -> str:
    return "config: " + json.dumps(cfg, sort_keys=False)


def _workers_env(args) -> None:
    # the environment variable wins over the flag by contract
    if args.workers is not None and "HORSESHOE_WORKERS" not in os.environ:
        os.environ["HORSESHOE_WORKERS"] = str(args.workers)


def _add_map_args(sp, with_general: bool = True) -> None:
    sp.add_argument("--a", default="1", help="Jacobian parameter, complex as re+imi")
    sp.add_argument("--c", default=None, help="normal form constant, complex as re+imi")
    if with_general:
        sp.add_argument("--degree", type=int, default=None, help="normal form degree (default 2)")
        sp.add_argument(
            "--coeffs",
            default=None,
            help="comma separated polynomial coefficients, constant term first",
        )


def _add_common(sp, out_required: bool = False) -> None:
    if out_required:
        sp.add_argument("--out", required=True, help="artifact path")
    else:
        sp.add_argument("--out", default=None, help="artifact path (default stdout)")
    sp.add_argument("--seed", type=int, default=0, help="recorded sampling seed")
    sp.add_argument("--workers", type=int, default=None, help="worker processes for sweeps")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_certify(args) -> int:
    henon = _map_from(args)
    _workers_env(args)
    cfg = _run_config(args, henon, ("method", "gamma", "alpha", "depth", "core_steps", "budget"))
    cones = ConeField(args.gamma)
    if args.method == "inequality":
        cert = certify_inequality(henon, cones, alpha=args.alpha)
    elif args.method == "cone-sweep":
        bidisc = Bidisc.round(args.R) if args.R is not None else None
        cert = certify_cone_sweep(
            henon,
            bidisc=bidisc,
            cones=cones,
            max_depth=args.depth,
            core_steps=args.core_steps,
            alpha=args.alpha,
        )
    else:
        _, _, cert = optimize_aperture(henon, time_budget=args.budget)
    _emit_text(cert.to_json(wall_ms=0.0, config=cfg) + "\n", args.out)
    return _verdict_code(cert.verdict)


def _cmd_cycles(args) -> int:
    if args.d < 2 or args.max_period < 1:
        raise ValueError("need --d >= 2 and --max-period >= 1")
    cfg = _run_config(args, None, ("d", "max_period"))
    text = f"# {_comment(cfg)}\n" + cycles_csv(args.d, args.max_period)
    _emit_text(text, args.out)
    return EX_OK


def _cmd_enumerate(args) -> int:
    henon = _map_from(args)
    cfg = _run_config(args, henon, ("n", "grid", "tol", "R"))
    bidisc = Bidisc.round(args.R) if args.R is not None else None
    points = enumerate_periodic(henon, args.n, bidisc=bidisc, grid=args.grid, tol=args.tol)
    text = f"# {_comment(cfg)}\n" + periodic_csv(points)
    _emit_text(text, args.out)
    return EX_OK


def _cmd_itinerary(args) -> int:
    henon = _map_from(args)
    cfg = _run_config(args, henon, ("x", "y", "back", "fwd", "resolution", "R"))
    bidisc = Bidisc.round(args.R) if args.R is not None else None
    labeling = build_labeling(henon, bidisc=bidisc, resolution=args.resolution)
    z = (parse_complex(args.x), parse_complex(args.y))
    word = itinerary(henon, z, args.back, args.fwd, labeling)
    _emit_text(f"# {_comment(cfg)}\n{word}\n", args.out)
    return EX_OK


def _cmd_slice(args) -> int:
    henon = _map_from(args)
    cfg = _run_config(args, henon, ("plane", "value", "window", "resolution", "horizon", "R"))
    window = tuple(float(t) for t in args.window.split(","))
    if len(window) != 4:
        raise ValueError("--window wants lo_re,hi_re,lo_im,hi_im")
    spec = SliceSpec(
        plane=args.plane,
        value=parse_complex(args.value),
        window=window,
        resolution=(args.resolution, args.resolution),
    )
    result = render_slice(henon, spec, radius=args.R, horizon=args.horizon)
    with open(args.out, "wb") as fh:
        fh.write(write_ppm(result, config_comment=_comment(cfg)))
    if args.csv:
        _emit_text(write_csv(result, config_comment=_comment(cfg)), args.csv)
    return EX_OK


def _chart_json(chart) -> dict:
    return {
        "center": [format_complex(chart.center[0]), format_complex(chart.center[1])],
        "e_u": [format_complex(chart.e_u[0]), format_complex(chart.e_u[1])],
        "e_s": [format_complex(chart.e_s[0]), format_complex(chart.e_s[1])],
        "r_u": chart.r_u,
        "r_s": chart.r_s,
    }


def _cmd_homoclinic(args) -> int:
    henon = _map_from(args)
    cfg = _run_config(args, henon, ("k", "d", "order", "resolution", "horizon"))
    if args.ppm:
        cfg["ppm"] = args.ppm
    saddle = find_saddle(henon, k=args.k)
    q = find_homoclinic(henon, saddle, order=args.order)
    n_steps, chart, cert = build_horseshoe(henon, saddle, q, d=args.d, order=args.order)
    doc = {
        "saddle": {
            "p": [format_complex(saddle.p[0]), format_complex(saddle.p[1])],
            "period": saddle.period,
            "lambda": format_complex(saddle.lam),
            "mu": format_complex(saddle.mu),
        },
        "q": [format_complex(q.q[0]), format_complex(q.q[1])],
        "angle": q.transversality_angle,
        "N": n_steps,
        "chart": _chart_json(chart),
        "certificate": json.loads(cert.to_json(wall_ms=0.0)),
        "config": cfg,
    }
    _emit_text(json.dumps(doc, indent=2, sort_keys=False) + "\n", args.out)
    if args.ppm:
        rgb = _overlay_rgb(henon, saddle, q, chart, args.resolution, args.horizon, args.order)
        with open(args.ppm, "wb") as fh:
            fh.write(encode_ppm(rgb, config_comment=_comment(cfg)))
    return _verdict_code(cert.verdict)


def _cmd_decay(args) -> int:
    henon = _map_from(args)
    cfg = _run_config(args, henon, ("depth", "initial", "y", "R"))
    bidisc = Bidisc.round(args.R) if args.R is not None else None
    y_value = parse_complex(args.y) if args.y is not None else None
    report = fiber_diameter_decay(
        henon, bidisc=bidisc, depth=args.depth, y_value=y_value, initial=args.initial
    )
    doc = {
        "depths": list(report.depths),
        "diameters": list(report.diameters),
        "counts": list(report.counts),
        "expected_counts": list(report.expected_counts),
        "ratios": list(report.ratios),
        "contraction": report.contraction,
        "geometric": report.geometric,
        "config": cfg,
    }
    _emit_text(json.dumps(doc, indent=2, sort_keys=False) + "\n", args.out)
    return EX_OK if report.geometric else EX_UNKNOWN


# ---------------------------------------------------------------------------
# homoclinic overlay: escape-time background, manifold curves, chart box


def _mark(rgb, row, col, color, half: int = 0) -> None:
    ny, nx = rgb.shape[:2]
    for dr in range(-half, half + 1):
        for dc in range(-half, half + 1):
            r, c = row + dr, col + dc
            if 0 <= r < ny and 0 <= c < nx:
                rgb[r, c] = color


def _draw_points(rgb, window, pts, color, half: int = 0) -> None:
    lo_re, hi_re, lo_im, hi_im = window
    ny, nx = rgb.shape[:2]
    for x, y in pts:
        if not (np.isfinite(x) and np.isfinite(y)):
            continue
        if not (lo_re <= x <= hi_re and lo_im <= y <= hi_im):
            continue
        col = int(round((x - lo_re) / (hi_re - lo_re) * (nx - 1)))
        row = int(round((hi_im - y) / (hi_im - lo_im) * (ny - 1)))
        _mark(rgb, row, col, color, half)


def _overlay_rgb(henon, saddle, q, chart, resolution: int, horizon: int, order: int):
    w_u = parametrize_manifold(henon, saddle, "unstable", order=order)
    w_s = parametrize_manifold(henon, saddle, "stable", order=order)
    curves = []
    for param in (w_u, w_s):
        ts = np.linspace(-param.valid_radius, param.valid_radius, 6000)
        pts = [param.eval(t) for t in ts]
        curves.append([(z[0].real, z[1].real) for z in pts])
    corners = [chart.embed(s1, s2) for s1 in (-1, 1) for s2 in (-1, 1)]
    anchor_x = [saddle.p[0].real, q.q[0].real] + [z[0].real for z in corners]
    anchor_y = [saddle.p[1].real, q.q[1].real] + [z[1].real for z in corners]
    pad = 0.35 * max(
        max(anchor_x) - min(anchor_x), max(anchor_y) - min(anchor_y), 1.0
    )
    window = (
        min(anchor_x) - pad,
        max(anchor_x) + pad,
        min(anchor_y) - pad,
        max(anchor_y) + pad,
    )
    spec = SliceSpec(plane="real_plane", window=window, resolution=(resolution, resolution))
    result = render_slice(henon, spec, horizon=horizon)
    rgb = _palette(result.forward, result.backward, result.horizon)
    _draw_points(rgb, window, curves[0], (255, 64, 64))
    _draw_points(rgb, window, curves[1], (64, 224, 64))
    edge = []
    for t in np.linspace(-1.0, 1.0, 2000):
        for z in (
            chart.embed(t, -1.0),
            chart.embed(t, 1.0),
            chart.embed(-1.0, t),
            chart.embed(1.0, t),
        ):
            edge.append((z[0].real, z[1].real))
    _draw_points(rgb, window, edge, (255, 224, 32))
    _draw_points(rgb, window, [(saddle.p[0].real, saddle.p[1].real)], (255, 255, 255), half=2)
    _draw_points(rgb, window, [(q.q[0].real, q.q[1].real)], (32, 224, 255), half=2)
    return rgb


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="horseshoe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="cmd", parser_class=_Parser, metavar="subcommand")

    sp = sub.add_parser("certify", help="cone certificate for one map")
    _add_map_args(sp)
    sp.add_argument(
        "--method",
        choices=("inequality", "cone-sweep", "optimize"),
        default="inequality",
        help="closed-form bound, verified bidisc sweep, or aperture search",
    )
    sp.add_argument("--gamma", type=float, default=1.0, help="cone aperture in (0, 1]")
    sp.add_argument("--alpha", type=float, default=ALPHA_DEFAULT, help="expansion weight")
    sp.add_argument("--depth", type=int, default=12, help="max sweep subdivision depth")
    sp.add_argument("--core-steps", dest="core_steps", type=int, default=0,
                    help="iterate cones this many extra steps across the core")
    sp.add_argument("--budget", type=float, default=10.0, help="optimize time budget, seconds")
    sp.add_argument("--R", type=float, default=None, help="bidisc radius override")
    _add_common(sp)
    sp.set_defaults(run=_cmd_certify)

    sp = sub.add_parser("cycles", help="exact cycle counts of the degree-d shift")
    sp.add_argument("--d", type=int, required=True, help="horseshoe degree")
    sp.add_argument("--max-period", dest="max_period", type=int, required=True)
    _add_common(sp)
    sp.set_defaults(run=_cmd_cycles)

    sp = sub.add_parser("enumerate", help="periodic points by damped Newton")
    _add_map_args(sp)
    sp.add_argument("--n", type=int, required=True, help="period (divisors included)")
    sp.add_argument("--grid", type=int, default=24, help="Newton seed lattice per axis")
    sp.add_argument("--tol", type=float, default=1e-10, help="residual tolerance")
    sp.add_argument("--R", type=float, default=None, help="bidisc radius override")
    _add_common(sp)
    sp.set_defaults(run=_cmd_enumerate)

    sp = sub.add_parser("itinerary", help="symbol word of an orbit window")
    _add_map_args(sp)
    sp.add_argument("--x", required=True, help="orbit point x, complex as re+imi")
    sp.add_argument("--y", required=True, help="orbit point y, complex as re+imi")
    sp.add_argument("--back", type=int, default=5, help="symbols before time zero")
    sp.add_argument("--fwd", type=int, default=5, help="symbols from time zero on")
    sp.add_argument("--resolution", type=int, default=512, help="strip labeling raster")
    sp.add_argument("--R", type=float, default=None, help="bidisc radius override")
    _add_common(sp)
    sp.set_defaults(run=_cmd_itinerary)

    sp = sub.add_parser("slice", help="escape-time raster of a 2D slice")
    _add_map_args(sp)
    sp.add_argument("--plane", choices=("fix_y", "fix_x", "real_plane"), default="fix_y")
    sp.add_argument("--value", default="0", help="pinned coordinate, complex as re+imi")
    sp.add_argument("--window", default="-3,3,-3,3", help="lo_re,hi_re,lo_im,hi_im")
    sp.add_argument("--resolution", type=int, default=512, help="pixels per axis")
    sp.add_argument("--horizon", type=int, default=100, help="escape-time cap")
    sp.add_argument("--R", type=float, default=None, help="escape radius override")
    sp.add_argument("--csv", default=None, help="also dump per-pixel CSV here")
    _add_common(sp, out_required=True)  # PPM is binary, force a path
    sp.set_defaults(run=_cmd_slice)

    sp = sub.add_parser("homoclinic", help="horseshoe chart from a transverse crossing")
    _add_map_args(sp)
    sp.add_argument("--k", type=int, default=1, help="saddle period")
    sp.add_argument("--d", type=int, default=2, help="strands the chart must carry")
    sp.add_argument("--order", type=int, default=30, help="manifold Taylor order")
    sp.add_argument("--ppm", default=None, help="optional real-slice overlay image")
    sp.add_argument("--resolution", type=int, default=512, help="overlay pixels per axis")
    sp.add_argument("--horizon", type=int, default=100, help="overlay escape-time cap")
    _add_common(sp)
    sp.set_defaults(run=_cmd_homoclinic)

    sp = sub.add_parser("decay", help="fiber enclosure diameters vs depth")
    _add_map_args(sp)
    sp.add_argument("--depth", type=int, default=6, help="refinement depth")
    sp.add_argument("--initial", type=int, default=48, help="initial x-axis cells")
    sp.add_argument("--y", default=None, help="fiber y value, complex as re+imi")
    sp.add_argument("--R", type=float, default=None, help="bidisc radius override")
    _add_common(sp)
    sp.set_defaults(run=_cmd_decay)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "run", None):
        parser.print_help(sys.stderr)
        return EX_USAGE
    t0 = time.perf_counter()
    try:
        code = args.run(args)
    except NotInK as exc:
        print(f"horseshoe: {exc}", file=sys.stderr)
        return EX_NO
    except UnresolvedSymbol as exc:
        print(f"horseshoe: {exc}", file=sys.stderr)
        return EX_UNKNOWN
    except ValueError as exc:
        print(f"horseshoe: error: {exc}", file=sys.stderr)
        return EX_USAGE
    except (RuntimeError, NotImplementedError, OverflowError) as exc:
        print(f"horseshoe: {exc}", file=sys.stderr)
        return EX_UNKNOWN
    print(f"wall_ms: {int((time.perf_counter() - t0) * 1000)}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
