"""Command-line front end.

Subcommands: ``region`` (build and export a region), ``compare`` (two-user
sweep over M with sum-DoF scalars), ``simulate`` (run the alignment scheme
and certify the corner point), ``slice`` (three-user plane cross-section).

Exit codes: 0 success, 1 usage error, 2 verification failure.  All CSV and
JSON output is byte-identical across identical invocations; SVG output is
presentation-only.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import exactgeom, regions, scheme
from ._svg import RegionFigure
from .exactgeom import rat_str
from .regions import AntennaConfig, DominantFace

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2

RESIDUAL_TOL = 1e-8


class CliError(Exception):
    def __init__(self, message, code=EXIT_USAGE):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage problems; the CLI contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError("%s: %s" % (self.prog, message), EXIT_USAGE)


def _int_list(text):
    try:
        return [int(tok) for tok in text.split(",") if tok != ""]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers, got %r" % text)


def _float_list(text):
    try:
        return [float(tok) for tok in text.split(",") if tok != ""]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated numbers, got %r" % text)


def _rational(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError("expected a rational like 3 or 12/5, got %r" % text)


def _rational_list(text):
    return [_rational(tok) for tok in text.split(",") if tok != ""]


def _default_seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("DOFLAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise CliError("DOFLAB_SEED must be an integer, got %r" % env)
    return 0


def _write(path, text):
    Path(path).write_text(text, encoding="utf-8")
    print("wrote %s" % path)


def _json_dump(doc):
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _point_str(point):
    return ", ".join(rat_str(x) for x in point)


def _line_endpoints(hs):
    """Axis intercepts of coeffs . d = bound for a 2-D half-space."""
    a1, a2 = hs.coeffs
    b = hs.bound
    return (b / a1, Fraction(0)), (Fraction(0), b / a2)


# ---------------------------------------------------------------------------
# region
# ---------------------------------------------------------------------------

def _build_region(args):
    if args.model == "outer":
        config = AntennaConfig(args.M, tuple(args.N))
        return config, regions.outer_bound_region(config)
    if args.model == "two-user":
        if len(args.N) != 2:
            raise CliError("two-user model needs --N N1,N2")
        config = AntennaConfig(args.M, tuple(args.N))
        return config, regions.two_user_region(args.M, args.N[0], args.N[1])
    if args.model == "three-user":
        if len(args.N) != 1:
            raise CliError("three-user model needs --N N (one equal receiver count)")
        n = args.N[0]
        config = AntennaConfig(args.M, (n, n, n))
        return config, regions.three_user_region(args.M, n)
    raise CliError("unknown model %r" % args.model)


def _region_svg(config, region):
    verts = exactgeom.vertex_enumerate(region)
    axis_max = min(config.M, config.N[0] + (config.N[1] if config.K > 1 else 0))
    fig = RegionFigure(axis_max=max(axis_max, 1), title="M=%d N=%s" % (config.M, ",".join(map(str, config.N))))
    fig.add_polygon([(v[0], v[1]) for v in verts])
    for i, hs in enumerate(region.halfspaces, start=1):
        p, q = _line_endpoints(hs)
        fig.add_line(p, q, label="L%d" % i)
    corner = regions.point_Q(config.M, config.N[0], config.N[1])
    if not isinstance(corner, DominantFace):
        fig.add_point(corner[0], corner[1], label="Q = (%s)" % _point_str(corner))
    return fig.render()


def cmd_region(args) -> int:
    config, region = _build_region(args)
    verts = exactgeom.vertex_enumerate(region)
    print("model=%s M=%d N=%s" % (args.model, config.M, ",".join(map(str, config.N))))
    print("halfspaces:")
    for hs in region.halfspaces:
        print("  %s" % hs.render())
    print("vertices:")
    for v in verts:
        print("  %s" % ",".join(rat_str(x) for x in v))
    if args.out:
        if args.format == "csv":
            out = Path(args.out)
            _write(out, exactgeom.vertices_to_csv(verts, region.dimension))
            _write(out.with_suffix(".halfspaces" + (out.suffix or ".csv")),
                   exactgeom.halfspaces_to_csv(region))
        elif args.format == "json":
            _write(args.out, _json_dump(regions.region_document(config, region)))
        elif args.format == "svg":
            if region.dimension != 2:
                raise CliError("svg output needs a 2-dimensional region")
            _write(args.out, _region_svg(config, region))
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def cmd_compare(args) -> int:
    if len(args.N) != 2:
        raise CliError("compare needs --N N1,N2")
    n1, n2 = args.N
    sweep = []
    for m in args.M:
        config = AntennaConfig(m, (n1, n2))
        region = regions.two_user_region(m, n1, n2)
        sweep.append((m, config, region, exactgeom.vertex_enumerate(region)))
    print("M,perfect,none,delayed")
    for m, config, region, _ in sweep:
        print("%d,%s,%s,%s" % (
            m,
            rat_str(regions.benchmark_sum_dof(config, "perfect")),
            rat_str(regions.benchmark_sum_dof(config, "none")),
            rat_str(exactgeom.lp_max(region, (Fraction(1), Fraction(1)))),
        ))
    if args.out:
        if args.format == "csv":
            lines = ["M,d1,d2"]
            for m, _, _, verts in sweep:
                for v in verts:
                    lines.append("%d,%s,%s" % (m, rat_str(v[0]), rat_str(v[1])))
            _write(args.out, "\n".join(lines) + "\n")
        elif args.format == "json":
            doc = {
                "N": [n1, n2],
                "sweep": [
                    {
                        "M": m,
                        **regions.region_document(config, region),
                        "sum_dof": {
                            "perfect": rat_str(regions.benchmark_sum_dof(config, "perfect")),
                            "none": rat_str(regions.benchmark_sum_dof(config, "none")),
                            "delayed": rat_str(exactgeom.lp_max(region, (Fraction(1), Fraction(1)))),
                        },
                    }
                    for m, config, region, _ in sweep
                ],
            }
            _write(args.out, _json_dump(doc))
        elif args.format == "svg":
            axis_max = max(min(m, n1 + n2) for m in args.M)
            fig = RegionFigure(axis_max=axis_max, title="N1=%d N2=%d" % (n1, n2))
            for m, _, _, verts in sweep:
                fig.add_polygon([(v[0], v[1]) for v in verts], label="M=%d" % m)
            _write(args.out, fig.render())
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _simulate_two_user(args, seed) -> int:
    n1, n2 = args.N
    summary = scheme.simulate_trials(args.M, n1, n2, args.trials, seed)
    print("achieved_dof = %s; failures %d" % (_point_str(summary.achieved), len(summary.failures)))
    print("case %s, %d slots/trial, max_residual %.3e, max_condition %.3e" % (
        summary.spec.case, summary.spec.total_slots, summary.max_residual, summary.max_condition,
    ))
    report = {
        "config": {"M": args.M, "N1": n1, "N2": n2},
        "case": summary.spec.case,
        "trials": summary.trials,
        "failures": [list(f) for f in summary.failures],
        "max_residual": summary.max_residual,
        "max_condition": summary.max_condition,
        "achieved_dof": [rat_str(x) for x in summary.achieved],
        "matches_corner": summary.matches_corner,
    }
    if args.snr_db:
        curve = scheme.rate_slope_estimate(summary.spec, seed, args.snr_db)
        print("rate_slopes = %.4f, %.4f (bits/slot per log2 P)" % curve.slopes)
        report["rate_slopes"] = list(curve.slopes)
        report["rate_curve"] = [
            {"snr_db": snr, "rate_user1": float(r[0]), "rate_user2": float(r[1])}
            for snr, r in zip(curve.snr_db, curve.rates)
        ]
    if args.out:
        _write(args.out, _json_dump(report))
    ok = (
        not summary.failures
        and summary.matches_corner
        and summary.max_residual < RESIDUAL_TOL
    )
    return EXIT_OK if ok else EXIT_VERIFY


def _simulate_three_user(args, seed) -> int:
    if len(set(args.N)) != 1:
        raise CliError("three-user simulation needs equal receiver counts")
    if args.target is None:
        raise CliError("three-user simulation needs --target d1,d2,d3")
    n = args.N[0]
    plan = regions.achievability_plan(args.M, n, tuple(args.target))
    components = []
    ok = True
    seeds = np.random.SeedSequence(seed).spawn(max(len(plan.components), 1))
    for comp, sub in zip(plan.components, seeds):
        entry = {
            "point": [rat_str(x) for x in comp.point],
            "weight": rat_str(comp.weight),
            "source": comp.source,
            "users": [u + 1 for u in comp.users],
        }
        if comp.source == regions.SOURCE_EXTERNAL:
            entry["status"] = "not simulated (external three-user corner scheme)"
            ok = False
        elif comp.source == regions.SOURCE_TWO_USER:
            summary = scheme.simulate_trials(args.M, n, n, args.trials, sub)
            entry["status"] = "simulated"
            entry["failures"] = len(summary.failures)
            entry["max_residual"] = summary.max_residual
            ok = ok and not summary.failures and summary.max_residual < RESIDUAL_TOL
        elif comp.source == regions.SOURCE_SINGLE_USER:
            _, max_res, failures = scheme.simulate_single_user(args.M, n, args.trials, sub)
            entry["status"] = "simulated"
            entry["failures"] = len(failures)
            entry["max_residual"] = max_res
            ok = ok and not failures and max_res < RESIDUAL_TOL
        else:
            entry["status"] = "silent"
        components.append(entry)
        print("%-18s weight %-8s point (%s): %s" % (
            comp.source, rat_str(comp.weight), _point_str(comp.point), entry["status"],
        ))
    print("target = (%s); plan identity %s" % (
        _point_str(plan.target), "exact" if plan.weighted_sum() == plan.target else "BROKEN",
    ))
    if args.out:
        _write(args.out, _json_dump({
            "config": {"M": args.M, "N": list(args.N)},
            "target": [rat_str(x) for x in plan.target],
            "components": components,
        }))
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_simulate(args) -> int:
    seed = _default_seed(args)
    if len(args.N) == 2:
        return _simulate_two_user(args, seed)
    if len(args.N) == 3:
        return _simulate_three_user(args, seed)
    raise CliError("simulate needs --N N1,N2 or --N N,N,N")


# ---------------------------------------------------------------------------
# slice
# ---------------------------------------------------------------------------

def cmd_slice(args) -> int:
    if len(args.N) != 1:
        raise CliError("slice needs --N N (one equal receiver count)")
    n = args.N[0]
    try:
        slc = regions.plane_slice(args.M, n, args.d3)
    except ValueError as err:
        raise CliError(str(err))
    corners = exactgeom.vertex_enumerate(slc.region)
    print("slice M=%d N=%d d3=%s" % (args.M, n, rat_str(slc.d3)))
    print("bounds:")
    for name in ("L0", "L1", "L2"):
        tag = " (redundant)" if name in slc.redundant_bounds else ""
        print("  %s: %s%s" % (name, slc.bounds[name].render(), tag))
    for name in sorted(slc.special_points):
        point = slc.special_points[name]
        if point is None:
            print("  %s absent" % name)
        else:
            print("  %s = (%s, %s)" % (name, rat_str(point[0]), rat_str(point[1])))
    if args.out:
        if args.format == "csv":
            lines = ["name,d1,d2,d3"]
            for name in sorted(slc.special_points):
                point = slc.special_points[name]
                if point is not None:
                    lines.append("%s,%s,%s,%s" % (name, *(rat_str(x) for x in point)))
            for i, c in enumerate(corners):
                lines.append("V%d,%s,%s,%s" % (i, rat_str(c[0]), rat_str(c[1]), rat_str(slc.d3)))
            _write(args.out, "\n".join(lines) + "\n")
        elif args.format == "json":
            doc = {
                "M": args.M,
                "N": n,
                "d3": rat_str(slc.d3),
                "bounds": {
                    name: {"coeffs": [rat_str(c) for c in hs.coeffs], "bound": rat_str(hs.bound)}
                    for name, hs in slc.bounds.items()
                },
                "redundant": sorted(slc.redundant_bounds),
                "special_points": {
                    name: None if p is None else [rat_str(x) for x in p]
                    for name, p in slc.special_points.items()
                },
                "corners": [[rat_str(x) for x in c] for c in corners],
            }
            _write(args.out, _json_dump(doc))
        elif args.format == "svg":
            fig = RegionFigure(axis_max=min(args.M, 2 * n),
                               title="S(d3=%s) M=%d N=%d" % (rat_str(slc.d3), args.M, n))
            fig.add_polygon([(c[0], c[1]) for c in corners])
            for name in ("L0", "L1", "L2"):
                p, q = _line_endpoints(slc.bounds[name])
                fig.add_line(p, q, label=name)
            for name in sorted(slc.special_points):
                point = slc.special_points[name]
                if point is not None:
                    fig.add_point(point[0], point[1], label=name)
            _write(args.out, fig.render())
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="doflab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_region = sub.add_parser("region", help="construct a DoF region and export it")
    p_region.add_argument("--model", required=True, choices=("outer", "two-user", "three-user"))
    p_region.add_argument("--M", type=int, required=True)
    p_region.add_argument("--N", type=_int_list, required=True)
    p_region.add_argument("--out")
    p_region.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    p_region.set_defaults(func=cmd_region)

    p_compare = sub.add_parser("compare", help="two-user regions across a sweep of M")
    p_compare.add_argument("--M", type=_int_list, required=True)
    p_compare.add_argument("--N", type=_int_list, required=True)
    p_compare.add_argument("--out")
    p_compare.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    p_compare.set_defaults(func=cmd_compare)

    p_sim = sub.add_parser("simulate", help="run the alignment scheme and certify the corner")
    p_sim.add_argument("--M", type=int, required=True)
    p_sim.add_argument("--N", type=_int_list, required=True)
    p_sim.add_argument("--trials", type=int, default=10)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--snr-db", dest="snr_db", type=_float_list, default=None)
    p_sim.add_argument("--target", type=_rational_list, default=None,
                       help="three-user DoF target d1,d2,d3 (rationals)")
    p_sim.add_argument("--out")
    p_sim.set_defaults(func=cmd_simulate)

    p_slice = sub.add_parser("slice", help="three-user plane cross-section at fixed d3")
    p_slice.add_argument("--M", type=int, required=True)
    p_slice.add_argument("--N", type=_int_list, required=True)
    p_slice.add_argument("--d3", type=_rational, required=True)
    p_slice.add_argument("--out")
    p_slice.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    p_slice.set_defaults(func=cmd_slice)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as err:
        print("error: %s" % err, file=sys.stderr)
        return err.code
    except (ValueError, scheme.SchemeError, exactgeom.GeometryError) as err:
        print("error: %s" % err, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
