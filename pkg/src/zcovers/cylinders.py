"""Saddle connections and cylinder decompositions in a fixed direction.

Work happens on a normalized copy of the surface: for the direction
``v = (a, b)`` the linear map ``[[a, b], [-b, a]]`` sends ``v`` to
``(|v|^2, 0)``, so the flow becomes horizontal while every coordinate stays
in the same field.  Lengths in the normalized picture are ``|v|`` times the
original ones and areas are ``|v|^2`` times the original ones.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from functools import lru_cache

from .flow import Direction, SingularHit, trace
from .numfield import Vec
from .surface import EdgeRef, TranslationSurface, common_field


@dataclass(frozen=True)
class SaddleConnection:
    start: tuple  # (polygon, vertex index)
    end: tuple
    start_class: int
    end_class: int
    hol: Vec
    word: tuple


@dataclass
class Cylinder:
    direction: Direction
    hol: Vec  # holonomy of the core curve
    circumference2: object
    height2: object
    area: object
    core_word: tuple
    core_start: tuple  # (polygon, point) on the core curve, original coordinates
    slabs: tuple  # ((polygon, lower level index), ...) in flow order
    modulus: object = None  # circumference / height, exact
    bottom: list = field(default_factory=list)
    top: list = field(default_factory=list)

    @property
    def circumference(self):
        return math.sqrt(float(self.circumference2))

    @property
    def height(self):
        return math.sqrt(float(self.height2))


@dataclass
class NotPeriodicAtBound:
    direction: Direction
    L_max: object
    unresolved: int
    reason: str = "separatrix longer than the bound"
    periodic = False

    def __bool__(self):
        return False


@dataclass
class Decomposition:
    direction: Direction
    L_max: object
    cylinders: list
    connections: list
    normalized: TranslationSurface
    levels: list  # per polygon: sorted exact cut levels in normalized y
    slab_cylinder: dict  # (polygon, level index) -> cylinder index
    scale2: object  # |v|^2
    periodic = True

    def __bool__(self):
        return True

    def normalize_point(self, pos):
        v = self.direction.v
        return Vec(v.x * pos.x + v.y * pos.y, -v.y * pos.x + v.x * pos.y)

    def locate(self, p, pos):
        """``(cylinder index, signed offset from the core)`` for a base point.

        The offset is in normalized units; divide by ``|v|`` for flat length.
        Points on a cut level return ``None``.
        """
        y = self.normalize_point(pos).y
        lv = self.levels[p]
        lo, hi = 0, len(lv) - 1
        while lo < hi - 1:
            mid = (lo + hi) // 2
            if lv[mid] <= y:
                lo = mid
            else:
                hi = mid
        if y <= lv[lo] or y >= lv[lo + 1]:
            return None
        cyl = self.slab_cylinder[(p, lo)]
        return cyl, y - (lv[lo] + lv[lo + 1]) / 2

    @lru_cache(maxsize=None)
    def float_levels(self):
        return [[float(x) for x in lv] for lv in self.levels]

    def locate_float(self, p, x, y):
        v = self.direction.floats()
        ny = -v[1] * x + v[0] * y
        lv = self.float_levels()[p]
        k = bisect.bisect_right(lv, ny) - 1
        if k < 0 or k >= len(lv) - 1:
            return None
        return self.slab_cylinder[(p, k)], ny - (lv[k] + lv[k + 1]) / 2

    def total_area(self):
        out = self.normalized.field.zero
        for c in self.cylinders:
            out = out + c.area
        return out

    def __hash__(self):
        return id(self)


def _prepare(surface: TranslationSurface, theta):
    d = Direction.of(theta)
    if not d.exact:
        raise ValueError("cylinder decompositions need an exact direction")
    fld = common_field([surface.field.gen, d.v.x, d.v.y])
    v = Vec(fld(d.v.x), fld(d.v.y))
    if v.is_zero():
        raise ValueError("zero direction")
    base = surface.base_change(fld)
    norm = base.transform(((v.x, v.y), (-v.y, v.x)))
    return Direction(v), base, norm, v.norm2()


def _outgoing_corners(norm: TranslationSurface):
    """Corners with a horizontal rightward separatrix: ``(p, i, along_edge)``."""
    one = norm.field.one
    east = Vec(one, norm.field.zero)
    out = []
    for p, poly in enumerate(norm.polygons):
        n = len(poly)
        for i in range(n):
            e_out, e_in = poly.edges[i], poly.edges[(i - 1) % n]
            if e_out.y.sign() == 0 and e_out.x.sign() > 0:
                out.append((p, i, True))
            elif e_out.cross(east).sign() > 0 and e_in.cross(east).sign() > 0:
                out.append((p, i, False))
    return out


def _trace_separatrices(norm, v, scale2, L_max):
    """Connections (original holonomy), pieces per polygon, unresolved count."""
    fld = norm.field
    bound2 = fld(L_max) * fld(L_max) * scale2 if L_max is not None else None
    east = (fld.one, fld.zero)
    connections = []
    pieces = {}
    unresolved = 0
    for p, i, along in _outgoing_corners(norm):
        poly = norm.polygons[p]
        start_vertex = poly.vertices[i]
        if along:
            length = poly.edges[i].x
            if bound2 is not None and (length * length - bound2).sign() > 0:
                unresolved += 1
                continue
            j = (i + 1) % len(poly)
            connections.append(_connection(norm, (p, i), (p, j), length, (), v, scale2))
            continue
        try:
            tr = trace(norm, (p, start_vertex), east, from_corner=i, max_length2=bound2)
        except SingularHit as hit:
            tr = hit.trajectory
            for seg in tr.segments:
                pieces.setdefault(seg.polygon, set()).add(seg.entry.y)
            connections.append(
                _connection(norm, (p, i), tr.hit_vertex, tr.elapsed, tuple(tr.word), v, scale2)
            )
            continue
        unresolved += 1
    return connections, pieces, unresolved


def _connection(norm, start, end, length, word, v, scale2):
    hol = v * (length / scale2)
    return SaddleConnection(
        start, end, norm.vertex_class_of(*start), norm.vertex_class_of(*end), hol, word
    )


def separatrices(surface: TranslationSurface, theta, L_max):
    """Rightward separatrices in direction ``theta`` traced up to flat length ``L_max``."""
    d, base, norm, scale2 = _prepare(surface, theta)
    conns, _, unresolved = _trace_separatrices(norm, d.v, scale2, L_max)
    return {"connections": conns, "unresolved": unresolved}


def _x_at(poly, j, y):
    e = poly.edges[j]
    v0 = poly.vertices[j]
    return v0.x + (y - v0.y) * e.x / e.y


def cylinder_decomposition(surface: TranslationSurface, theta, L_max):
    d, base, norm, scale2 = _prepare(surface, theta)
    v = d.v
    if L_max is not None and L_max <= 0:
        return NotPeriodicAtBound(d, L_max, 0, "non-positive bound")
    conns, pieces, unresolved = _trace_separatrices(norm, v, scale2, L_max)
    if unresolved:
        return NotPeriodicAtBound(d, L_max, unresolved)
    levels = []
    slab_info = {}
    for p, poly in enumerate(norm.polygons):
        ys = {q.y for q in poly.vertices} | pieces.get(p, set())
        lv = sorted(ys)
        levels.append(lv)
        n = len(poly)
        for k in range(len(lv) - 1):
            lo, hi = lv[k], lv[k + 1]
            mid = (lo + hi) / 2
            left = right = None
            for j in range(n):
                e = poly.edges[j]
                y0 = poly.vertices[j].y
                y1 = y0 + e.y
                if e.y.sign() > 0 and y0 <= lo and hi <= y1:
                    right = j
                elif e.y.sign() < 0 and y1 <= lo and hi <= y0:
                    left = j
            if left is None or right is None:
                return NotPeriodicAtBound(d, L_max, 0, "slab boundary not found")
            width = _x_at(poly, right, mid) - _x_at(poly, left, mid)
            slab_info[(p, k)] = (lo, hi, right, width)
    index = {(p, levels[p][k]): (p, k) for (p, k) in slab_info}
    succ = {}
    for (p, k), (lo, hi, right, width) in slab_info.items():
        ref = EdgeRef(p, right)
        q = norm.gluing[ref].polygon
        tau = norm.shift[ref]
        nxt = index.get((q, lo + tau.y))
        if nxt is None or slab_info[nxt][1] != hi + tau.y:
            return NotPeriodicAtBound(d, L_max, 0, "slab images do not match")
        succ[(p, k)] = nxt
    if len(set(succ.values())) != len(succ):
        return NotPeriodicAtBound(d, L_max, 0, "slab map is not a permutation")
    cylinders = []
    slab_cyl = {}
    for key in sorted(slab_info):
        if key in slab_cyl:
            continue
        cyc = []
        cur = key
        while cur not in slab_cyl:
            slab_cyl[cur] = len(cylinders)
            cyc.append(cur)
            cur = succ[cur]
        if cur != key:
            return NotPeriodicAtBound(d, L_max, 0, "slab orbit is not periodic")
        lo, hi = slab_info[key][0], slab_info[key][1]
        h = hi - lo
        circ = sum((slab_info[s][3] for s in cyc), norm.field.zero)
        word = []
        for p, k in cyc:
            ref = EdgeRef(p, slab_info[(p, k)][2])
            word.append((norm.class_of[ref], norm.exit_sign[ref]))
        # a point on the core: middle of the first slab's midline
        p0, k0 = key
        poly = norm.polygons[p0]
        mid = (lo + hi) / 2
        xl = _x_at(poly, slab_info[key][2], mid) - slab_info[key][3] / 2
        core_pt = _denormalize(Vec(xl, mid), v, scale2)
        cylinders.append(
            Cylinder(
                direction=d,
                hol=v * (circ / scale2),
                circumference2=circ * circ / scale2,
                height2=h * h / scale2,
                area=h * circ / scale2,
                core_word=tuple(word),
                core_start=(p0, core_pt),
                slabs=tuple(cyc),
                modulus=circ / h,
            )
        )
    for conn in conns:
        _attach_boundary(conn, norm, levels, slab_cyl, cylinders, v, scale2)
    return Decomposition(d, L_max, cylinders, conns, norm, levels, slab_cyl, scale2)


def _denormalize(q, v, scale2):
    # inverse of [[a, b], [-b, a]] is [[a, -b], [b, a]] / |v|^2
    return Vec((v.x * q.x - v.y * q.y) / scale2, (v.y * q.x + v.x * q.y) / scale2)


def _attach_boundary(conn, norm, levels, slab_cyl, cylinders, v, scale2):
    p, i = conn.start
    y = norm.polygons[p].vertices[i].y
    lv = levels[p]
    k = lv.index(y)
    if k + 1 < len(lv) and (p, k) in slab_cyl:
        cylinders[slab_cyl[(p, k)]].bottom.append(conn)
    if k > 0 and (p, k - 1) in slab_cyl:
        cylinders[slab_cyl[(p, k - 1)]].top.append(conn)


# -- harvesting directions ----------------------------------------------------------


def saddle_connection_vectors(surface: TranslationSurface, L_max):
    """Holonomies of saddle connections of flat length at most ``L_max``.

    Found by unfolding visibility wedges from every polygon corner.
    """
    fld = surface.field
    L2 = fld(L_max) * fld(L_max)
    found = set()
    if L_max <= 0:
        return found

    def strictly_inside(vec, left, right):
        # the wedge is the open cone turning counterclockwise from right to left
        return right.cross(vec).sign() > 0 and vec.cross(left).sign() > 0

    def seg_dist2_exceeds(a, b):
        # is the squared distance from the origin to segment ab above L2?
        d = b - a
        t_num = -(a.dot(d))
        dd = d.norm2()
        if t_num.sign() <= 0:
            return (a.norm2() - L2).sign() > 0
        if (t_num - dd).sign() >= 0:
            return (b.norm2() - L2).sign() > 0
        # squared distance = cross(a, d)^2 / |d|^2
        c = a.cross(d)
        return (c * c - L2 * dd).sign() > 0

    for p0, poly0 in enumerate(surface.polygons):
        n0 = len(poly0)
        for i0 in range(n0):
            origin = poly0.vertices[i0]
            # neighbouring vertices along edges
            for vec in (poly0.edges[i0], -poly0.edges[(i0 - 1) % n0]):
                if (vec.norm2() - L2).sign() <= 0:
                    found.add(vec)
            stack = []
            for j in range(n0):
                if j in (i0, (i0 - 1) % n0):
                    continue
                a = poly0.vertices[j] - origin
                b = poly0.vertices[(j + 1) % n0] - origin
                stack.append((p0, j, a, b, b, a))
            for j in range(n0):
                if j in (i0, (i0 - 1) % n0, (i0 + 1) % n0):
                    continue
                vec = poly0.vertices[j] - origin
                if (vec.norm2() - L2).sign() <= 0:
                    found.add(vec)
            while stack:
                p, j, a, b, left, right = stack.pop()
                # crossing edge j of polygon p (from a to b in unfolded coords)
                if seg_dist2_exceeds(a, b):
                    continue
                ref = EdgeRef(p, j)
                partner = surface.gluing[ref]
                q, jj = partner
                poly = surface.polygons[q]
                m = len(poly)
                # unfolded position of q's vertex jj+1 equals a, vertex jj equals b
                off = a - poly.vertices[(jj + 1) % m]
                pts = [poly.vertices[k] + off for k in range(m)]
                for k in range(m):
                    if k in (jj, (jj + 1) % m):
                        continue
                    vec = pts[k]
                    if strictly_inside(vec, left, right) and (vec.norm2() - L2).sign() <= 0:
                        found.add(vec)
                for k in range(m):
                    if k == jj:
                        continue
                    ea, eb = pts[k], pts[(k + 1) % m]
                    if ea.cross(eb).sign() <= 0:
                        continue
                    # narrow the wedge to the cone over this edge
                    nr = ea if right.cross(ea).sign() > 0 else right
                    nl = eb if eb.cross(left).sign() > 0 else left
                    if nr.cross(nl).sign() <= 0:
                        continue
                    stack.append((q, k, ea, eb, nl, nr))
    return found


def direction_key(vec: Vec):
    """Projective key and canonical sign of a nonzero vector."""
    if vec.x.sign() < 0 or (vec.x.sign() == 0 and vec.y.sign() < 0):
        vec = -vec
    if vec.x.sign() == 0:
        return ("inf",), vec
    return ("slope", vec.y / vec.x), vec


def periodic_directions(surface: TranslationSurface, L_max):
    """Directions of saddle connections of length at most ``L_max`` whose
    decomposition resolves at the same bound, in order of angle."""
    if L_max <= 0:
        return []
    best = {}
    for vec in saddle_connection_vectors(surface, L_max):
        key, canon = direction_key(vec)
        cur = best.get(key)
        if cur is None or (canon.norm2() - cur.norm2()).sign() < 0:
            best[key] = canon
    out = []
    for key, vec in best.items():
        dec = cylinder_decomposition(surface, vec, L_max)
        if dec:
            out.append((Direction(vec), dec))
    out.sort(key=lambda item: math.atan2(*reversed(item[0].floats())) % math.pi)
    return out
