"""axiblow command line: angle, profile, curves, analyze, velocity, verify."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .acceptance import VerifyContext, run_checks
from .classify import classify_point, default_radii, growth_exponent, rescaled_profile_residual
from .errors import AxiblowError
from .field import Field, read_axifield, sample_field, velocity_at, write_axifield
from .functionals import QuadratureSpec, curves_csv, radii_grid, sweep
from .profiles import PROFILES, build_profile, garabedian_angular
from .specfun import find_z0

PARAM_FLAGS = ("x1", "x2", "gamma", "e1", "e2")
EXIT_FAIL = 1
EXIT_USAGE = 2


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _profile_params(args) -> dict:
    return {k: getattr(args, k) for k in PARAM_FLAGS if getattr(args, k, None) is not None}


def _add_params(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("profile parameters")
    g.add_argument("--x1", type=float, help="base point x1 (stokes, halfplane)")
    g.add_argument("--x2", type=float, help="base point x2 (halfplane, axis)")
    g.add_argument("--gamma", type=float, help="axis profile amplitude")
    g.add_argument("--e1", type=float, help="halfplane normal, x1 component")
    g.add_argument("--e2", type=float, help="halfplane normal, x2 component")


def _add_source(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--field", help="AXIFIELD file")
    src.add_argument("--profile", choices=sorted(PROFILES), help="built-in analytic profile")
    _add_params(p)
    p.add_argument("--x0", type=float, nargs=2, metavar=("X1", "X2"),
                   help="center (default: the profile's base point, or the origin for files)")


def _add_quad(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rule", choices=("gauss", "midpoint"), default="gauss")
    p.add_argument("--n-rho", type=int, default=48)
    p.add_argument("--n-theta", type=int, default=48)
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: AXIBLOW_THREADS)")


def _add_radii(p: argparse.ArgumentParser) -> None:
    p.add_argument("--radii", type=float, nargs=3, metavar=("RMIN", "RMAX", "COUNT"),
                   help="radius sweep (default depends on the field extent)")
    p.add_argument("--linear", action="store_true", help="linearly spaced radii instead of geometric")


def _load(args) -> tuple[Field, tuple[float, float]]:
    if args.field:
        field = read_axifield(args.field)
        center = (0.0, 0.0)
    else:
        field, params = build_profile(args.profile, _profile_params(args))
        center = PROFILES[args.profile].center(params)
    x0 = tuple(args.x0) if args.x0 else center
    return field, x0


def _quad(args) -> QuadratureSpec:
    return QuadratureSpec(n_rho=args.n_rho, n_theta=args.n_theta, rule=args.rule)


def _radii(args, field, x0) -> np.ndarray:
    if args.radii:
        rmin, rmax, count = args.radii
        return radii_grid(rmin, rmax, int(count), log=not args.linear)
    return default_radii(field, x0)


# -- commands ------------------------------------------------------------------------

def cmd_angle(args) -> int:
    root = find_z0(args.tol)
    c0 = garabedian_angular().c0
    report = {
        "z0": root.z0,
        "residual": root.residual,
        "theta_star": root.theta_star,
        "opening": root.opening,
        "water_angle": root.water_angle,
        "theta_star_deg": math.degrees(root.theta_star),
        "opening_deg": math.degrees(root.opening),
        "water_angle_deg": math.degrees(root.water_angle),
        "c0": c0,
        "stokes_opening": 2.0 * math.pi / 3.0,
    }
    if args.json:
        _emit(_dump(report), None)
        return 0
    print(f"z0 (zero of P'_3/2)      : {root.z0:.15f}   |P'_3/2(z0)| = {root.residual:.1e}")
    print(f"theta* = arccos(-z0)     : {report['theta_star_deg']:.6f} deg")
    print(f"opening 2 theta*         : {report['opening_deg']:.6f} deg")
    print(f"arccos(z0) = pi - theta* : {report['water_angle_deg']:.6f} deg")
    print(f"c0                       : {c0:.15f}")
    print("Stokes corner opening    : 120 deg")
    return 0


def cmd_profile(args) -> int:
    field, params = build_profile(args.name, _profile_params(args))
    nx = args.nx or args.n
    ny = args.ny or args.n
    if nx < 2 or ny < 2:
        raise AxiblowError("grid needs at least 2 nodes per axis")
    extent = tuple(args.extent) if args.extent else PROFILES[args.name].extent(params)
    grid = sample_field(field, nx, ny, extent, name=args.name)
    out = args.out or f"{args.name}.axf"
    write_axifield(grid, out)
    print(f"wrote {out}: {nx}x{ny} on [{extent[0]:g},{extent[1]:g}]x[{extent[2]:g},{extent[3]:g}]",
          file=sys.stderr)
    return 0


def cmd_curves(args) -> int:
    field, x0 = _load(args)
    radii = _radii(args, field, x0)
    table = sweep(field, x0, radii, quad=_quad(args), threads=args.threads)
    _emit(curves_csv(table), args.out)
    diag = {"x0": list(x0), "case": table.case.value, "m_column": table.m_column,
            "flags": table.flags, "notes": table.notes, "errors": table.errors}
    if args.diag:
        Path(args.diag).write_text(_dump(diag), encoding="utf-8")
    for line in table.errors + table.notes:
        print(f"note: {line}", file=sys.stderr)
    return 0


def cmd_analyze(args) -> int:
    field, x0 = _load(args)
    radii = _radii(args, field, x0)
    pc = classify_point(field, x0, radii, quad=_quad(args), threads=args.threads)
    report = pc.as_dict()
    report["x0"] = list(x0)
    if args.rescale:
        rr = [0.4, 0.2, 0.1]
        try:
            report["rescale"] = {"radii": rr, "residual": rescaled_profile_residual(field, rr, quad=_quad(args))}
        except (AxiblowError, ArithmeticError, ValueError) as exc:
            report["warnings"].append(f"rescale: {exc}")
    if args.growth:
        try:
            report["growth"] = growth_exponent(field, np.geomspace(0.05, 0.5, 6), quad=_quad(args)).as_dict()
        except (AxiblowError, ArithmeticError, ValueError) as exc:
            report["warnings"].append(f"growth: {exc}")
    _emit(_dump(report), args.out)
    return 0


def cmd_velocity(args) -> int:
    field, _ = _load(args)
    start = np.array(args.start, float)
    end = np.array(args.end, float)
    rows = []
    for t in np.linspace(0.0, 1.0, args.n):
        X, Y, Z = start + t * (end - start)
        v = velocity_at(field, X, Y, Z)
        rows.append([X, Y, Z, *(v + 0.0)])
    buf = [",".join(("X", "Y", "Z", "vX", "vY", "vZ"))]
    buf += [",".join(f"{v:.17g}" for v in row) for row in rows]
    _emit("\n".join(buf) + "\n", args.out)
    return 0


def cmd_verify(args) -> int:
    ctx = VerifyContext(z0_offset=args.inject_z0_offset)
    results = run_checks(args.filter, ctx)
    if not results:
        print(f"no checks match {args.filter!r}", file=sys.stderr)
        return EXIT_USAGE
    if args.json:
        _emit(_dump({"passed": all(r.passed for r in results), "checks": [r.as_dict() for r in results]}), None)
    else:
        for r in results:
            print(r.line())
            if args.verbose:
                for s in r.subresults:
                    print(f"    [{'ok' if s.passed else 'XX'}] {s.name}: {s.detail}")
        n_pass = sum(r.passed for r in results)
        print(f"{n_pass}/{len(results)} checks passed")
    return 0 if all(r.passed for r in results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="axiblow", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("angle", help="cone angle of the pointed-bubble profile")
    p.add_argument("--json", action="store_true")
    p.add_argument("--tol", type=float, default=1e-12, help="root residual tolerance")
    p.set_defaults(func=cmd_angle)

    p = sub.add_parser("profile", help="sample a profile to an AXIFIELD file")
    p.add_argument("name", choices=sorted(PROFILES))
    _add_params(p)
    p.add_argument("--n", type=int, default=256, help="nodes per axis")
    p.add_argument("--nx", type=int)
    p.add_argument("--ny", type=int)
    p.add_argument("--extent", type=float, nargs=4, metavar=("X1MIN", "X1MAX", "X2MIN", "X2MAX"))
    p.add_argument("--out", help="output path (default NAME.axf)")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("curves", help="functional sweep over radii (CSV)")
    _add_source(p)
    _add_radii(p)
    _add_quad(p)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--diag", help="diagnostics JSON path")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("analyze", help="classify a point (JSON)")
    _add_source(p)
    _add_radii(p)
    _add_quad(p)
    p.add_argument("--rescale", action="store_true", help="add the degenerate-limit rescaling residual")
    p.add_argument("--growth", action="store_true", help="add the growth-exponent table")
    p.add_argument("--out", help="JSON path (default stdout)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("velocity", help="sample the 3D velocity along a segment (CSV)")
    _add_source(p)
    p.add_argument("--start", type=float, nargs=3, required=True, metavar=("X", "Y", "Z"))
    p.add_argument("--end", type=float, nargs=3, required=True, metavar=("X", "Y", "Z"))
    p.add_argument("--n", type=int, default=11)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_velocity)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--filter", help="run checks whose name or tag contains this string")
    p.add_argument("--json", action="store_true")
    p.add_argument("-v", "--verbose", action="store_true", help="print every sub-result")
    p.add_argument("--inject-z0-offset", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"axiblow: I/O error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (AxiblowError, ValueError) as exc:
        print(f"axiblow: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
