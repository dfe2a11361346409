"""Command-line entry point.

Every run starts with ``# key=value`` lines echoing the resolved
configuration.  Exit status: 0 success, 2 invalid input, 3 inconclusive at
the requested bound.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import __version__
from . import examples as ex
from . import tsf
from .approx import (
    BadEps,
    admits_rectangle,
    as_eps,
    sigma_prime_measure,
    stage_quantities,
    strips_in_direction,
)
from .cover import (
    BoundaryNotInP,
    ZeroCycle,
    classify_cylinder_lift,
    cocycle,
    make_cover,
    strips_exist_certificate,
)
from .cylinders import cylinder_decomposition, periodic_directions
from .flow import (
    Direction,
    FlowError,
    SingularHit,
    boundedness_probe,
    first_return_iet,
    trace,
    trajectory_csv_rows,
)
from .numfield import FieldError, Vec
from .surface import SurfaceError, cone_angles, holonomy
from .veech import (
    EmptyStripFamily,
    enumerate_group,
    strip_approx_verdict,
    strip_sweep,
    theta_exceptional_scan,
)

EXIT_OK, EXIT_INVALID, EXIT_INCONCLUSIVE = 0, 2, 3


class UsageError(Exception):
    pass


class Inconclusive(Exception):
    pass


def fmt(x):
    """Decimal approximation at 1e-12 resolution."""
    return f"{float(x):.12f}"


def lit(x):
    return x.literal() if hasattr(x, "literal") else str(x)


# -- argument parsing ----------------------------------------------------------------------


def _common(p, *, cycle=False, direction=False, seed=False):
    g = p.add_argument_group("input")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--surface", metavar="FILE", help="surface definition file")
    src.add_argument("--example", metavar="NAME", help=f"built-in example ({', '.join(ex.BUILDERS)})")
    if cycle:
        g.add_argument("--cycle", metavar="NAME", help="CYCLE section naming the cover")
    if direction:
        d = g.add_mutually_exclusive_group()
        d.add_argument("--direction", metavar="A,B", help="exact direction as two field literals")
        d.add_argument("--theta-deg", type=float, metavar="X", help="float direction angle in degrees")
    if seed:
        g.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="FILE", help="write the main output here instead of stdout")


def build_parser():
    ap = argparse.ArgumentParser(prog="zcovers", description="Z-covers of translation surfaces")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("validate", help="check a surface file and report its invariants")
    _common(p)

    p = sub.add_parser("cylinders", help="cylinder decomposition in a direction")
    _common(p, cycle=True, direction=True)
    p.add_argument("--lmax", type=Fraction, default=Fraction(20))
    p.add_argument("--figure", metavar="PATH")

    p = sub.add_parser("strips", help="look for infinite strips among periodic directions")
    _common(p, cycle=True)
    p.add_argument("--lmax", type=Fraction, default=Fraction(10))

    p = sub.add_parser("cover", help="describe the cover of a cycle")
    _common(p, cycle=True)

    p = sub.add_parser("cocycle", help="signed crossing count with the cycle")
    _common(p, cycle=True, direction=True, seed=True)
    p.add_argument("--point", metavar="P:X,Y")
    p.add_argument("--time", type=Fraction, required=True)

    p = sub.add_parser("simulate", help="trace a trajectory on the cover")
    _common(p, cycle=True, direction=True, seed=True)
    p.add_argument("--point", metavar="P:X,Y")
    p.add_argument("--time", type=Fraction)
    p.add_argument("--crossings", type=int)
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--svg", metavar="PATH")

    p = sub.add_parser("iet", help="first-return interval exchange with level displacements")
    _common(p, cycle=True, direction=True)
    p.add_argument("--transversal", metavar="P:X0,Y0:X1,Y1", required=True)
    p.add_argument("--crossings", type=int, default=100_000)

    p = sub.add_parser("probe-bounded", help="running maximum of |level| along a trajectory")
    _common(p, cycle=True, direction=True, seed=True)
    p.add_argument("--point", metavar="P:X,Y")
    p.add_argument("--time", type=Fraction, default=Fraction(10_000))
    p.add_argument("--checkpoints", type=int, default=16, help="number of geometric checkpoints")
    p.add_argument("--figure", metavar="PATH")

    p = sub.add_parser("approx", help="approximation of directions by orbit strips")
    _common(p, cycle=True, direction=True)
    p.add_argument("--eps", type=Fraction, default=Fraction(1, 20))
    p.add_argument("--radius", type=float, default=100.0, help="entry bound R for group elements")
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--lmax", type=Fraction, default=Fraction(20))
    p.add_argument("--grid", type=int, help="sweep N uniform directions instead of one")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("scan", help="directions with few well-approximating orbit vectors")
    _common(p, cycle=True)
    p.add_argument("--vector", metavar="A,B", help="orbit seed (default: first strip holonomy)")
    p.add_argument("--d", type=float, default=0.5)
    p.add_argument("--radius", type=float, default=100.0)
    p.add_argument("--grid", type=int, default=1024)
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--lmax", type=Fraction, default=Fraction(20))
    p.add_argument("--figure", metavar="PATH")

    p = sub.add_parser("admits", help="rectangle predicate and band measure for a strip")
    _common(p, cycle=True, direction=True, seed=True)
    p.add_argument("--strip-direction", metavar="A,B", required=True)
    p.add_argument("--strip-index", type=int, default=0, help="index among strips in that direction")
    p.add_argument("--point", metavar="P:X,Y")
    p.add_argument("--eps", type=Fraction, default=Fraction(1, 2))
    p.add_argument("--samples", type=int, default=0, help="Monte Carlo samples for the band measure")
    p.add_argument("--lmax", type=Fraction, default=Fraction(20))

    p = sub.add_parser("examples", help="list or export built-in examples")
    esub = p.add_subparsers(dest="action", required=True)
    esub.add_parser("list")
    e = esub.add_parser("export")
    e.add_argument("name")
    e.add_argument("--out", metavar="FILE")
    return ap


# -- helpers ---------------------------------------------------------------------------------


class Context:
    def __init__(self, args):
        self.args = args
        if getattr(args, "example", None):
            b = ex.get(args.example)
            self.surface, self.cycles, self.generators = b.surface, b.cycles, b.veech_generators
            self.source = f"example:{args.example}"
        else:
            f = tsf.load(args.surface)
            self.surface, self.cycles, self.generators = f.surface, f.cycles, f.generators
            self.source = args.surface
        self.fld = self.surface.field

    def cycle_name(self):
        name = getattr(self.args, "cycle", None)
        if name:
            if name not in self.cycles:
                raise UsageError(f"no cycle {name!r}; available: {', '.join(self.cycles) or 'none'}")
            return name
        if len(self.cycles) == 1:
            return next(iter(self.cycles))
        raise UsageError("choose a cycle with --cycle " f"({', '.join(self.cycles) or 'none defined'})")

    def cover(self):
        name = self.cycle_name()
        return make_cover(self.surface, self.cycles[name], name)

    def parse_vec(self, text):
        try:
            a, b = text.split(",")
            return Vec(self.fld.parse(a), self.fld.parse(b))
        except ValueError as e:
            raise UsageError(f"bad vector {text!r}: {e}") from None

    def direction(self, required=True):
        a = self.args
        if getattr(a, "direction", None):
            v = self.parse_vec(a.direction)
            if v.is_zero():
                raise UsageError("direction must be nonzero")
            return Direction(v)
        if getattr(a, "theta_deg", None) is not None:
            return Direction.from_angle(math.radians(a.theta_deg))
        if required:
            raise UsageError("give --direction or --theta-deg")
        return None

    def point(self):
        a = self.args
        if getattr(a, "point", None):
            try:
                p, xy = a.point.split(":")
                p = int(p)
            except ValueError:
                raise UsageError(f"bad point {a.point!r}; expected P:X,Y") from None
            pos = self.parse_vec(xy)
            if not 0 <= p < len(self.surface.polygons) or not self.surface.polygons[p].contains(pos):
                raise UsageError(f"point {a.point} is not in polygon {p}")
            return p, pos
        return self.surface.random_point(random.Random(a.seed), 20)


def header(out, verb, ctx=None, **items):
    lines = [f"# verb={verb}"]
    if ctx is not None:
        lines.append(f"# surface={ctx.source}")
        args = vars(ctx.args)
        for k in sorted(args):
            if k in ("verb", "surface", "example", "out", "action") or args[k] is None:
                continue
            lines.append(f"# {k}={args[k]}")
    for k, v in items.items():
        lines.append(f"# {k}={v}")
    out.write("\n".join(lines) + "\n")


def writer(out):
    return csv.writer(out, lineterminator="\n")


# -- verbs -------------------------------------------------------------------------------------


def cmd_validate(ctx, out):
    s = ctx.surface
    header(out, "validate", ctx)
    out.write(f"genus={s.genus}\n")
    out.write(f"polygons={len(s.polygons)} edges={len(s.edge_classes)} vertices={len(s.vertex_classes)}\n")
    out.write(f"area={lit(s.area)} ~ {fmt(s.area)}\n")
    out.write("angles=" + " ".join(f"{v}:{m}pi" for v, m in cone_angles(s)) + "\n")
    out.write("marked=" + " ".join(str(m) for m in s.marked_input) + "\n")
    for name, w in ctx.cycles.items():
        h = holonomy(s, w)
        bd = s.relative_boundary(w)
        out.write(f"cycle {name}: hol=({lit(h.x)}, {lit(h.y)}) boundary={list(bd)}\n")
    for g in ctx.generators:
        out.write(f"generator {'*'.join(g.word)}: " + " ".join(lit(x) for x in g.entries()) + "\n")
    return EXIT_OK


def _cylinder_rows(dec, cover=None):
    rows = [["index", "hol_x_exact", "hol_y_exact", "hol_x", "hol_y", "circumference", "height",
             "area_exact", "area", "modulus", "k"]]
    for i, c in enumerate(dec.cylinders):
        k = classify_cylinder_lift(cover, c).k if cover is not None else ""
        rows.append([i, lit(c.hol.x), lit(c.hol.y), fmt(c.hol.x), fmt(c.hol.y),
                     fmt(c.circumference), fmt(c.height), lit(c.area), fmt(c.area),
                     fmt(c.modulus), k])
    return rows


def cmd_cylinders(ctx, out):
    d = ctx.direction()
    if not d.exact:
        raise UsageError("cylinder decompositions need an exact --direction")
    cover = ctx.cover() if ctx.cycles and (ctx.args.cycle or len(ctx.cycles) == 1) else None
    header(out, "cylinders", ctx, units="lengths in surface units; exact literals plus 1e-12 decimals")
    dec = cylinder_decomposition(ctx.surface, d, ctx.args.lmax)
    if not dec:
        out.write("# result=not periodic at bound\n")
        raise Inconclusive
    writer(out).writerows(_cylinder_rows(dec, cover))
    if ctx.args.figure:
        from .plotting import cylinders_figure

        cylinders_figure(ctx.surface, dec, ctx.args.figure)
    return EXIT_OK


def cmd_strips(ctx, out):
    cover = ctx.cover()
    header(out, "strips", ctx, cycle_used=cover.name)
    pd = periodic_directions(ctx.surface, ctx.args.lmax)
    rep = strips_exist_certificate(cover, pd, ctx.args.lmax)
    w = writer(out)
    w.writerow(["direction_x", "direction_y", "cylinder", "k", "hol_x", "hol_y", "area"])
    for d, idx, lc in rep.witnesses:
        w.writerow([lit(d.v.x), lit(d.v.y), idx, lc.k, fmt(lc.v.x), fmt(lc.v.y), fmt(lc.area)])
    out.write(f"# directions_checked={rep.directions_checked} periodic={rep.directions_periodic}\n")
    out.write(f"# core_span_index={rep.span_index}\n")
    if not rep.conclusive:
        out.write("# verdict=no strip found at bound\n")
        raise Inconclusive
    out.write(f"# verdict={rep.verdict}\n")
    return EXIT_OK


def cmd_cover(ctx, out):
    cover = ctx.cover()
    s = ctx.surface
    h = holonomy(s, cover.w)
    header(out, "cover", ctx)
    out.write(f"cycle={cover.name}\n")
    out.write("weights=" + " ".join(f"{s.edge_classes[c]}:{wt}" for c, wt in cover.w.weights) + "\n")
    out.write(f"hol=({lit(h.x)}, {lit(h.y)})\n")
    out.write(f"boundary={list(s.relative_boundary(cover.w))}\n")
    out.write(f"recurrent={cover.recurrent}\n")
    return EXIT_OK


def cmd_cocycle(ctx, out):
    cover = ctx.cover()
    d = ctx.direction()
    x = ctx.point()
    header(out, "cocycle", ctx, start=f"{x[0]}:{lit(x[1].x)},{lit(x[1].y)}")
    out.write(f"alpha={cocycle(cover, x, d, ctx.args.time)}\n")
    return EXIT_OK


def cmd_simulate(ctx, out):
    cover = ctx.cover()
    d = ctx.direction()
    x = ctx.point()
    a = ctx.args
    if a.time is None and a.crossings is None:
        raise UsageError("give --time or --crossings")
    header(out, "simulate", ctx, start=f"{x[0]}:{lit(x[1].x)},{lit(x[1].y)}",
           units="t in multiples of the direction vector; coordinates as 1e-12 enclosures")
    status = EXIT_OK
    try:
        tr = trace(cover, x, d, time=a.time, crossings=a.crossings, level=a.level)
    except SingularHit as e:
        tr = e.trajectory
        out.write(f"# stopped=singular hit at t={fmt(e.elapsed)}\n")
    w = writer(out)
    w.writerow(["t", "polygon", "x_lo", "x_hi", "y_lo", "y_hi", "level"])
    for t, p, xl, xh, yl, yh, lvl in trajectory_csv_rows(tr):
        w.writerow([fmt(t), p, fmt(xl), fmt(xh), fmt(yl), fmt(yh), lvl])
    out.write(f"# stop_reason={tr.stop_reason} crossings={tr.crossings} level={tr.level}\n")
    if a.svg:
        from .svg import surface_svg

        with open(a.svg, "w", encoding="utf-8") as fh:
            fh.write(surface_svg(ctx.surface, tr, title=f"trajectory on {ctx.source}"))
    return status


def cmd_iet(ctx, out):
    cover = ctx.cover()
    d = ctx.direction()
    try:
        p, a0, a1 = ctx.args.transversal.split(":")
        tv = (int(p), ctx.parse_vec(a0), ctx.parse_vec(a1))
    except ValueError:
        raise UsageError("transversal must look like P:X0,Y0:X1,Y1") from None
    header(out, "iet", ctx, units="interval parameters u in (0,1) along the transversal")
    data = first_return_iet(cover, tv, d, crossings=ctx.args.crossings)
    w = writer(out)
    w.writerow(["interval", "start_exact", "length_exact", "start", "length", "image_rank", "shift", "displacement"])
    for j, length in enumerate(data.intervals):
        w.writerow([j, lit(data.breakpoints[j]), lit(length), fmt(data.breakpoints[j]), fmt(length),
                    data.permutation[j], fmt(data.shifts[j]), data.displacements[j]])
    return EXIT_OK


def cmd_probe(ctx, out):
    cover = ctx.cover()
    d = ctx.direction()
    x = ctx.point()
    a = ctx.args
    T = a.time
    n = max(1, a.checkpoints)
    cps = sorted({T * Fraction(2) ** (k - n + 1) for k in range(n)})
    header(out, "probe-bounded", ctx, start=f"{x[0]}:{lit(x[1].x)},{lit(x[1].y)}",
           units="t in multiples of the direction vector")
    rows = boundedness_probe(cover, x, d, T, cps)
    w = writer(out)
    w.writerow(["t", "max_abs_level"])
    for t, m in rows:
        w.writerow([fmt(t), m])
    if a.figure:
        from .plotting import probe_figure

        probe_figure(rows, a.figure)
    return EXIT_OK


def _strip_lifts(ctx, cover):
    strips = []
    seen = set()
    for _, vec in _strip_dirs(ctx):
        for ref in strips_in_direction(cover, vec, ctx.args.lmax):
            key = (ref.lift.v.x, ref.lift.v.y, ref.lift.k, ref.lift.area)
            if key not in seen:
                seen.add(key)
                strips.append(ref.lift)
    return strips


def _strip_dirs(ctx):
    if ctx.args.example:
        b = ex.get(ctx.args.example)
        if b.strip_directions:
            return b.strip_directions
    return [(None, d) for d, _ in periodic_directions(ctx.surface, ctx.args.lmax)]


def cmd_approx(ctx, out):
    a = ctx.args
    cover = ctx.cover()
    eps = as_eps(a.eps)
    if not ctx.generators:
        raise UsageError("the surface defines no GENERATOR sections")
    strips = _strip_lifts(ctx, cover)
    if a.grid:
        header(out, "approx", ctx, strips=len(strips))
        gammas = enumerate_group(ctx.generators, a.radius, exact=False)
        thetas = (np.arange(a.grid) + 0.5) * math.pi / a.grid
        jobs = max(1, a.jobs)
        chunks = np.array_split(thetas, jobs)
        with ThreadPoolExecutor(jobs) as pool:
            parts = list(pool.map(lambda th: strip_sweep(strips, th, float(eps), a.min_count, gammas), chunks))
        counts = np.concatenate(parts)
        w = writer(out)
        w.writerow(["theta_rad", "count", "verdict"])
        for th, c in zip(thetas, counts):
            w.writerow([fmt(th), int(c), "WellApproximated" if c >= a.min_count else "InconclusiveAtBound"])
        frac = float((counts >= a.min_count).mean())
        out.write(f"# group_elements={len(gammas)} well_approximated_fraction={fmt(frac)}\n")
        return EXIT_OK
    d = ctx.direction()
    gammas = enumerate_group(ctx.generators, a.radius, exact=d.exact and a.radius <= 50)
    header(out, "approx", ctx, strips=len(strips), group_elements=len(gammas))
    v = strip_approx_verdict(cover, strips, d.v, eps, a.min_count, a.radius, gammas)
    out.write(f"verdict={v.verdict} count={v.count} k={v.k}\n")
    if v.verdict != "WellApproximated":
        raise Inconclusive
    return EXIT_OK


def cmd_scan(ctx, out):
    a = ctx.args
    if not ctx.generators:
        raise UsageError("the surface defines no GENERATOR sections")
    if a.vector:
        x = ctx.parse_vec(a.vector).to_float()
    else:
        strips = _strip_lifts(ctx, ctx.cover())
        if not strips:
            raise UsageError("no strip found; give --vector")
        x = strips[0].v.to_float()
    gammas = enumerate_group(ctx.generators, a.radius, exact=False)
    header(out, "scan", ctx, seed_vector=f"{fmt(x[0])},{fmt(x[1])}", group_elements=len(gammas))
    res = theta_exceptional_scan(x, gammas, a.d, a.grid, min_count=a.min_count)
    w = writer(out)
    w.writerow(["box_size_rad_over_pi", "occupied_boxes"])
    for s, o in res.box_counts:
        w.writerow([fmt(s), o])
    out.write(f"# excluded_fraction={fmt(res.excluded_fraction)} box_count_slope={fmt(res.slope)}\n")
    if a.figure:
        from .plotting import scan_figure

        scan_figure(res, a.figure)
    return EXIT_OK


def cmd_admits(ctx, out):
    a = ctx.args
    cover = ctx.cover()
    refs = strips_in_direction(cover, ctx.parse_vec(a.strip_direction), a.lmax)
    if not refs:
        raise UsageError("no strip in that direction at this bound")
    if not 0 <= a.strip_index < len(refs):
        raise UsageError(f"strip index out of range (0..{len(refs) - 1})")
    ref = refs[a.strip_index]
    x = ctx.point()
    d = ctx.direction(required=False)
    header(out, "admits", ctx, start=f"{x[0]}:{lit(x[1].x)},{lit(x[1].y)}")
    st = stage_quantities(ref.lift, a.eps)
    out.write(f"k={ref.lift.k} area={lit(ref.lift.area)} h={fmt(st.h)} eta={fmt(st.eta)}\n")
    out.write(f"band_fits={st.band_fits()} area_floor={st.meets_area_floor()}\n")
    out.write(f"admits={admits_rectangle(cover, x, ref, a.eps, d)}\n")
    if a.samples:
        m = sigma_prime_measure(cover, ref, a.eps, a.samples, a.seed)
        out.write(f"band_measure={fmt(m.estimate)} sigma={fmt(m.sigma)} samples={m.samples}\n")
    return EXIT_OK


def cmd_examples(args, out):
    if args.action == "list":
        header(out, "examples list")
        for name in ex.BUILDERS:
            b = ex.get(name)
            out.write(f"{name}: genus {b.surface.genus}, cycles {', '.join(b.cycles)}\n")
            for n in b.notes:
                out.write(f"    {n}\n")
        return EXIT_OK
    b = ex.get(args.name)
    out.write(tsf.dump_bundle(b))
    return EXIT_OK


VERBS = {
    "validate": cmd_validate,
    "cylinders": cmd_cylinders,
    "strips": cmd_strips,
    "cover": cmd_cover,
    "cocycle": cmd_cocycle,
    "simulate": cmd_simulate,
    "iet": cmd_iet,
    "probe-bounded": cmd_probe,
    "approx": cmd_approx,
    "scan": cmd_scan,
    "admits": cmd_admits,
}


def run(argv, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    buf = io.StringIO()
    try:
        if args.verb == "examples":
            code = cmd_examples(args, buf)
        else:
            code = VERBS[args.verb](Context(args), buf)
    except Inconclusive:
        code = EXIT_INCONCLUSIVE
    except (UsageError, tsf.SurfaceFileError, SurfaceError, FieldError, FlowError, BadEps,
            EmptyStripFamily, ZeroCycle, BoundaryNotInP, KeyError, OSError, ValueError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        stderr.write(f"error: {type(e).__name__}: {msg}\n")
        return EXIT_INVALID
    text = buf.getvalue()
    dest = getattr(args, "out", None)
    if dest:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return code


def main(argv=None):
    sys.exit(run(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
