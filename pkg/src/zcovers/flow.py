"""Straight-line flow on surfaces and Z-covers, first-return maps, probes.

Time is measured in multiples of the direction vector: a trajectory in
direction ``v`` run for time ``t`` moves by ``t * v``.  With exact directions
this keeps every crossing point in the coordinate field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .numfield import FieldElement, Vec
from .surface import EdgeRef, TranslationSurface, common_field

DEFAULT_CROSSING_BUDGET = 10**6
FLOAT_TOL = 2.0**-40


class FlowError(RuntimeError):
    pass


class SingularHit(FlowError):
    """The trajectory ran into a point of ``P`` after time ``elapsed``."""

    def __init__(self, elapsed, trajectory=None, where=None):
        super().__init__(f"trajectory hits a marked point at time {elapsed}")
        self.elapsed = elapsed
        self.trajectory = trajectory
        self.where = where


class DegenerateStart(FlowError):
    pass


class NoReturnAtBudget(FlowError):
    pass


class TransversalParallel(ValueError):
    pass


@dataclass(frozen=True)
class Direction:
    """Flow direction; ``v`` is an exact :class:`Vec` or a pair of floats."""

    v: object

    @classmethod
    def of(cls, d):
        if isinstance(d, Direction):
            return d
        if isinstance(d, Vec):
            return cls(d)
        a, b = d
        if isinstance(a, float) or isinstance(b, float):
            return cls((float(a), float(b)))
        return cls(Vec(a, b))

    @classmethod
    def from_angle(cls, theta):
        return cls((math.cos(theta), math.sin(theta)))

    @property
    def exact(self):
        return isinstance(self.v, Vec)

    def floats(self):
        if self.exact:
            return self.v.to_float()
        return self.v

    def angle(self):
        x, y = self.floats()
        return math.atan2(y, x)

    def __neg__(self):
        return Direction(-self.v if self.exact else (-self.v[0], -self.v[1]))

    def __str__(self):
        if self.exact:
            return f"({self.v.x.literal() if isinstance(self.v.x, FieldElement) else self.v.x}, " \
                   f"{self.v.y.literal() if isinstance(self.v.y, FieldElement) else self.v.y})"
        return f"({self.v[0]!r}, {self.v[1]!r})"


def _sgn(x):
    if isinstance(x, float):
        if abs(x) <= FLOAT_TOL:
            return 0
        return 1 if x > 0 else -1
    return x.sign()


class _FVec(tuple):
    """Float vector with the small interface of :class:`Vec` used here."""

    __slots__ = ()

    def __new__(cls, x, y):
        return tuple.__new__(cls, (x, y))

    x = property(lambda self: self[0])
    y = property(lambda self: self[1])

    def __add__(self, o):
        return _FVec(self[0] + o.x, self[1] + o.y)

    def __sub__(self, o):
        return _FVec(self[0] - o.x, self[1] - o.y)

    def __mul__(self, s):
        return _FVec(self[0] * s, self[1] * s)

    def cross(self, o):
        return self[0] * o.y - self[1] * o.x

    def dot(self, o):
        return self[0] * o.x + self[1] * o.y

    def __eq__(self, o):
        return abs(self[0] - o.x) <= FLOAT_TOL and abs(self[1] - o.y) <= FLOAT_TOL

    __hash__ = tuple.__hash__

    def to_float(self):
        return (self[0], self[1])


class _Geometry:
    """Per-direction ray data for one surface (exact or float)."""

    def __init__(self, surface: TranslationSurface, direction: Direction):
        self.exact = direction.exact
        if self.exact:
            v = direction.v
            fld = common_field([surface.field.gen, v.x, v.y])
            surface = surface.base_change(fld)
            self.field = fld
            self.v = Vec(fld(v.x), fld(v.y))
            if self.v.is_zero():
                raise ValueError("zero direction")
            self.verts = [p.vertices for p in surface.polygons]
            self.edges = [p.edges for p in surface.polygons]
            self.shift = surface.shift
        else:
            self.v = _FVec(*direction.v)
            if self.v == _FVec(0.0, 0.0):
                raise ValueError("zero direction")
            self.verts = [[_FVec(*q.to_float()) for q in p.vertices] for p in surface.polygons]
            self.edges = [[_FVec(*q.to_float()) for q in p.edges] for p in surface.polygons]
            self.shift = {k: _FVec(*s.to_float()) for k, s in surface.shift.items()}
            self.field = None
        self.surface = surface
        # outgoing edges: (index, 1 / cross(e_i, v), cross(e_i, V_i))
        self.out = []
        for verts, edges in zip(self.verts, self.edges):
            rows = []
            for i, e in enumerate(edges):
                c = e.cross(self.v)
                if _sgn(c) < 0:
                    rows.append((i, 1 / c, e.cross(verts[i])))
            self.out.append(rows)

    def point(self, pos):
        if self.exact:
            fld = self.field
            return Vec(fld(pos.x), fld(pos.y))
        x, y = pos.to_float() if hasattr(pos, "to_float") else pos
        return _FVec(float(x), float(y))

    def exit(self, p, pos):
        """``(s, edge, vertex)``: ray leaves polygon ``p`` after time ``s``.

        ``vertex`` is the index of the polygon vertex hit, or ``None``.
        """
        edges = self.edges[p]
        best = None
        for i, inv, k in self.out[p]:
            e = edges[i]
            s = (k - e.cross(pos)) * inv
            if best is None or s < best[0]:
                best = (s, i)
        s, i = best
        verts = self.verts[p]
        n = len(verts)
        if _sgn((verts[i] - pos).cross(self.v)) == 0:
            return s, i, i
        j = (i + 1) % n
        if _sgn((verts[j] - pos).cross(self.v)) == 0:
            return s, i, j
        return s, i, None

    def vertex_index(self, p, pos):
        for j, q in enumerate(self.verts[p]):
            if q == pos:
                return j
        return None

    def boundary_edge(self, p, pos):
        edges, verts = self.edges[p], self.verts[p]
        for i, e in enumerate(edges):
            if _sgn(e.cross(pos - verts[i])) == 0:
                return i
        return None


@dataclass
class Segment:
    polygon: int
    entry: object
    exit: object
    t_entry: object
    t_exit: object
    edge_class: Optional[int] = None
    sign: int = 0


@dataclass
class Trajectory:
    start: tuple
    direction: Direction
    segments: list
    levels: list
    elapsed: object
    end: tuple
    stop_reason: str
    crossings: int = 0
    word: list = field(default_factory=list)
    crossing_times: list = field(default_factory=list)
    start_level: int = 0
    sheet_level: int = 0
    approximate: bool = False

    @property
    def level(self):
        return self.levels[-1] if self.levels else self.start_level


def _cover_parts(target):
    if hasattr(target, "base") and hasattr(target, "w"):
        return target.base, target
    return target, None


def _sheet_table(surface, cover):
    """Level shift for leaving each polygon edge in the cover gluing table."""
    cached = getattr(cover, "_sheet_table", None)
    if cached is not None:
        return cached
    weights = cover.w.as_dict()
    table = {}
    for ref, partner in surface.gluing.items():
        if surface.is_rep[ref]:
            table[ref] = -weights.get(surface.class_of[ref], 0)
        else:
            table[ref] = weights.get(surface.class_of[partner], 0)
    try:
        object.__setattr__(cover, "_sheet_table", table)
    except AttributeError:
        pass
    return table


def _geometry(surface, direction):
    cache = surface.__dict__.setdefault("_geometry_cache", {})
    key = (direction.v.x, direction.v.y) if direction.exact else tuple(direction.v)
    geo = cache.get(key)
    if geo is None:
        if len(cache) > 256:
            cache.clear()
        geo = cache[key] = _Geometry(surface, direction)
    return geo


def trace(
    target,
    start,
    theta,
    *,
    time=None,
    crossings=None,
    max_length2=None,
    level=0,
    stop_segment=None,
    from_corner=None,
    record=True,
    allow_boundary_vertex=False,
):
    """Follow the flow from ``start = (polygon, position)``.

    Budgets: ``time`` (multiples of the direction vector), ``crossings``
    (edge crossings, default one million) and ``max_length2`` (squared flat
    length).  Running into a point of ``P`` raises :class:`SingularHit`.

    ``stop_segment = (polygon, A, B)`` stops at the first hit of the open
    segment ``AB`` after time zero; hitting ``A`` or ``B`` is a singular stop.
    ``from_corner = i`` starts a separatrix at vertex ``i`` of the start
    polygon; the direction must point strictly into that corner.
    """
    surface, cover = _cover_parts(target)
    direction = Direction.of(theta)
    geo = _geometry(surface, direction)
    v = geo.v
    p, pos = start
    pos = geo.point(pos)
    zero = geo.field.zero if geo.exact else 0.0
    if time is not None and not geo.exact:
        time = float(time)
    if crossings is None:
        crossings = DEFAULT_CROSSING_BUDGET
    weights = cover.w.as_dict() if cover is not None else None
    sheet = _sheet_table(surface, cover) if cover is not None else None
    v2 = v.x * v.x + v.y * v.y

    poly_verts = geo.verts[p]
    if from_corner is not None:
        i = from_corner
        n = len(poly_verts)
        pos = poly_verts[i]
        e_out = geo.edges[p][i]
        e_in = geo.edges[p][(i - 1) % n]
        if not (_sgn(e_out.cross(v)) > 0 and _sgn(e_in.cross(v)) > 0):
            raise DegenerateStart("direction does not point into the corner")
    elif geo.vertex_index(p, pos) is not None:
        raise DegenerateStart("start point is a vertex (a point of P)")
    elif geo.exact and not geo.surface.polygons[p].contains(pos):
        raise DegenerateStart("start point is outside its polygon")

    t = zero
    lvl = level
    sheet_lvl = level
    segments = []
    levels = []
    word = []
    times = []
    ncross = 0
    traj = Trajectory((p, pos), direction, segments, levels, t, (p, pos), "time",
                      start_level=level, sheet_level=level, approximate=not geo.exact)

    stop = None
    if stop_segment is not None:
        sp, a, b = stop_segment
        a, b = geo.point(a), geo.point(b)
        d = b - a
        den = d.cross(v)
        if _sgn(den) == 0:
            raise TransversalParallel("transversal is parallel to the flow")
        stop = (sp, a, d, 1 / den)

    def finish(reason, end_pos, end_t):
        traj.elapsed = end_t
        traj.end = (p, end_pos)
        traj.stop_reason = reason
        traj.crossings = ncross
        traj.sheet_level = sheet_lvl
        traj.word = word
        traj.crossing_times = times
        if not levels or levels[-1] != lvl:
            levels.append(lvl)
        return traj

    while True:
        s, i, vert = geo.exit(p, pos)
        # stop segment hit inside this polygon
        if stop is not None and stop[0] == p:
            sp, a, d, inv = stop
            # pos + s_hit v = a + u d
            rel = pos - a
            s_hit = -d.cross(rel) * inv
            u = rel.cross(v) * inv
            end_t = t + s_hit
            if (
                _sgn(s_hit) > 0
                and _sgn(s_hit - s) <= 0
                and _sgn(u) >= 0
                and _sgn(u - 1) <= 0
                and (time is None or _sgn(end_t - time) <= 0)
            ):
                hit = pos + v * s_hit
                if record:
                    segments.append(Segment(p, pos, hit, t, end_t))
                if _sgn(u) == 0 or _sgn(u - 1) == 0:
                    finish("singular", hit, end_t)
                    raise SingularHit(end_t, traj, where="transversal endpoint")
                traj.stop_param = u
                return finish("transversal", hit, end_t)
        end_t = t + s
        if time is not None and _sgn(end_t - time) >= 0:
            q = pos + v * (time - t)
            if record:
                segments.append(Segment(p, pos, q, t, time))
            if _sgn(end_t - time) > 0 or vert is None:
                return finish("time", q, time)
        if max_length2 is not None and _sgn(end_t * end_t * v2 - max_length2) > 0:
            if record:
                segments.append(Segment(p, pos, pos + v * s, t, end_t))
            return finish("length", pos + v * s, end_t)
        q = pos + v * s
        if vert is not None:
            if record:
                segments.append(Segment(p, pos, q, t, end_t))
            finish("singular", q, end_t)
            traj.hit_vertex = (p, vert)
            raise SingularHit(end_t, traj, where=(p, vert))
        if ncross >= crossings:
            return finish("crossings", pos, t)
        ref = EdgeRef(p, i)
        c = surface.class_of[ref]
        sg = surface.exit_sign[ref]
        if weights is not None:
            lvl += sg * weights.get(c, 0)
            sheet_lvl += sheet[ref]
        word.append((c, sg))
        times.append(end_t)
        ncross += 1
        if record:
            segments.append(Segment(p, pos, q, t, end_t, c, sg))
            levels.append(lvl)
        partner = surface.gluing[ref]
        pos = q + geo.shift[ref]
        p = partner.polygon
        t = end_t
        if stop is not None and p == stop[0]:
            # endpoints on an edge are also reached from the neighbouring polygon
            rel = pos - stop[1]
            if _sgn(rel.cross(stop[2])) == 0:
                u = rel.dot(stop[2])
                if _sgn(u) == 0 or _sgn(u - stop[2].dot(stop[2])) == 0:
                    finish("singular", pos, t)
                    raise SingularHit(t, traj, where="transversal endpoint")


def cocycle_of(trajectory, w):
    weights = w.as_dict()
    return sum(s * weights.get(c, 0) for c, s in trajectory.word)


# -- first return maps --------------------------------------------------------


@dataclass
class IETData:
    """First-return map to an open transversal, with level displacements.

    Positions on the transversal are parameters ``u`` in ``(0, 1)`` along
    ``A + u (B - A)``; interval lengths are measured in the same unit.
    """

    transversal: tuple
    direction: Direction
    breakpoints: list
    intervals: list
    permutation: list
    displacements: list
    shifts: list

    def locate(self, u):
        bps = self.breakpoints
        for j in range(len(self.intervals)):
            if bps[j] <= u < bps[j + 1]:
                return j
        raise ValueError("parameter outside the transversal")

    def apply(self, u, level=0):
        j = self.locate(u)
        return u + self.shifts[j], level + self.displacements[j]

    def iterate(self, u, n, level=0):
        for _ in range(n):
            u, level = self.apply(u, level)
        return u, level

    def point(self, u):
        p, a, b = self.transversal
        return p, a + (b - a) * u


def _singular_backward_starts(surface: TranslationSurface, direction: Direction):
    back = -direction.v
    out = []
    for p, poly in enumerate(surface.polygons):
        n = len(poly)
        for i in range(n):
            e_out, e_in = poly.edges[i], poly.edges[(i - 1) % n]
            if e_out.cross(back).sign() > 0 and e_in.cross(back).sign() > 0:
                out.append((p, i))
    return out


def first_return_iet(target, transversal, theta, *, crossings=100_000) -> IETData:
    surface, cover = _cover_parts(target)
    direction = Direction.of(theta)
    if not direction.exact:
        raise ValueError("first return maps need an exact direction")
    fld = common_field([surface.field.gen, direction.v.x, direction.v.y])
    p, a, b = transversal
    a = Vec(fld(a.x), fld(a.y))
    b = Vec(fld(b.x), fld(b.y))
    transversal = (p, a, b)
    poly = (surface if surface.field == fld else surface.base_change(fld)).polygons[p]
    if not (poly.contains(a) and poly.contains(b) and poly.contains((a + b) * fld(Fraction(1, 2)), strict=True)):
        raise FlowError("transversal must run through the interior of its polygon")
    if (b - a).cross(direction.v).sign() == 0:
        raise TransversalParallel("transversal is parallel to the flow")
    back = Direction(-direction.v)
    cuts = {fld.zero, fld.one}

    def backward(start, corner=None):
        try:
            tr = trace(surface, start, back, crossings=crossings, stop_segment=transversal,
                       from_corner=corner, record=False)
        except SingularHit:
            return
        except DegenerateStart:
            return
        if tr.stop_reason != "transversal":
            raise NoReturnAtBudget(f"backward orbit from {start} does not reach the transversal")
        cuts.add(tr.stop_param)

    for q, i in _singular_backward_starts(surface, direction):
        backward((q, surface.polygons[q].vertices[i]), i)
    for end in (a, b):
        backward((p, end))
    bps = sorted(cuts)
    intervals, shifts, disps = [], [], []
    for lo, hi in zip(bps, bps[1:]):
        results = []
        for frac in (Fraction(1, 2), Fraction(1, 4), Fraction(3, 4)):
            u = lo + (hi - lo) * frac
            tr = trace(target, (p, a + (b - a) * u), direction, crossings=crossings,
                       stop_segment=transversal, record=False)
            if tr.stop_reason != "transversal":
                raise NoReturnAtBudget(f"orbit from u={u} does not return")
            results.append((tr.stop_param - u, tr.level - tr.start_level))
        if any(r != results[0] for r in results):
            raise FlowError("return map is not a translation on a continuity interval")
        intervals.append(hi - lo)
        shifts.append(results[0][0])
        disps.append(results[0][1])
    images = sorted(range(len(intervals)), key=lambda j: bps[j] + shifts[j])
    perm = [0] * len(intervals)
    for rank, j in enumerate(images):
        perm[j] = rank
    return IETData(transversal, direction, bps, intervals, perm, disps, shifts)


# -- probes ---------------------------------------------------------------------


def boundedness_probe(cover, start, theta, T, checkpoints):
    """Running maximum of ``|level|`` over ``[0, t]`` for each checkpoint ``t``.

    Float checkpoints are compared with the crossing times in floating point.
    """
    tr = trace(cover, start, theta, time=T, record=False)
    checkpoints = sorted(checkpoints)
    times = tr.crossing_times
    if any(isinstance(c, float) for c in checkpoints):
        times = [float(w) for w in times]
    out = []
    k = 0
    best = 0
    lvl = tr.start_level
    weights = cover.w.as_dict()
    for (c, s), when in zip(tr.word, times):
        while k < len(checkpoints) and when > checkpoints[k]:
            out.append((checkpoints[k], best))
            k += 1
        lvl += s * weights.get(c, 0)
        best = max(best, abs(lvl))
    while k < len(checkpoints):
        out.append((checkpoints[k], best))
        k += 1
    return out


# -- export ---------------------------------------------------------------------


def _interval(x):
    if isinstance(x, FieldElement):
        lo, hi = x.approx(60)
        return float(lo), float(hi)
    return float(x), float(x)


def trajectory_csv_rows(traj: Trajectory):
    """Rows ``t, polygon, x_lo, x_hi, y_lo, y_hi, level`` at each segment start."""
    rows = []
    crossed = iter(traj.levels)
    lvl = traj.start_level
    for seg in traj.segments:
        xl, xh = _interval(seg.entry.x)
        yl, yh = _interval(seg.entry.y)
        rows.append((float(seg.t_entry), seg.polygon, xl, xh, yl, yh, lvl))
        if seg.edge_class is not None:
            lvl = next(crossed, lvl)
    p, q = traj.end
    xl, xh = _interval(q.x)
    yl, yh = _interval(q.y)
    rows.append((float(traj.elapsed), p, xl, xh, yl, yh, lvl))
    return rows
