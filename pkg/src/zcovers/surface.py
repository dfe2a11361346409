"""Compact translation surfaces glued from convex polygons.

Conventions used throughout the package:

* Polygon ``p`` has vertices ``V[0..n-1]`` in counterclockwise order and edge
  ``(p, i)`` runs from ``V[i]`` to ``V[i+1]``.
* Every glued pair of edges forms an *edge class*.  Its representative is the
  lexicographically smaller :class:`EdgeRef`, and the class is oriented like
  its representative.
* A path crossing an oriented arc from its right side to its left side
  contributes ``+1`` to intersection numbers.  Leaving a polygon through its
  own edge goes from the left of that edge to its right, so the crossing sign
  is ``-1`` through a representative and ``+1`` through its partner.
* Every vertex class belongs to the marked set ``P``.  Vertex classes of cone
  angle ``2*pi`` must be listed explicitly as marked points.
"""

from __future__ import annotations

import random as _random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple

from .intlinalg import lattice_index, matvec, smith_normal_form, solve_integer
from .numfield import QQ, Field, FieldElement, Vec


class SurfaceError(ValueError):
    pass


class NonConvexPolygon(SurfaceError):
    pass


class EdgeVectorMismatch(SurfaceError):
    pass


class DanglingEdge(SurfaceError):
    pass


class EmptySingularSet(SurfaceError):
    pass


class UnmarkedVertex(SurfaceError):
    pass


class EdgeRef(NamedTuple):
    polygon: int
    edge: int

    def __str__(self):
        return f"{self.polygon}.{self.edge}"

    @classmethod
    def parse(cls, text):
        p, e = text.strip().split(".")
        return cls(int(p), int(e))


def common_field(values) -> Field:
    fld = QQ
    for v in values:
        if isinstance(v, FieldElement) and v.field.degree > 1:
            if fld.degree > 1 and v.field != fld:
                raise SurfaceError("coordinates live in different number fields")
            fld = v.field
    return fld


class Polygon:
    """Convex polygon with exact vertices in counterclockwise order."""

    def __init__(self, vertices, fld: Field | None = None):
        verts = [v if isinstance(v, Vec) else Vec(*v) for v in vertices]
        if fld is None:
            fld = common_field([c for v in verts for c in v])
        self.field = fld
        self.vertices = tuple(Vec(fld(v.x), fld(v.y)) for v in verts)
        n = len(self.vertices)
        if n < 3:
            raise NonConvexPolygon("a polygon needs at least three vertices")
        self.edges = tuple(self.vertices[(i + 1) % n] - self.vertices[i] for i in range(n))
        for i in range(n):
            turn = self.edges[i].cross(self.edges[(i + 1) % n]).sign()
            if turn <= 0:
                raise NonConvexPolygon(
                    f"vertex {(i + 1) % n} is {'collinear' if turn == 0 else 'reflex'}"
                )
        # convex turns plus a single winding: total turning must be one circle
        crossings = 0
        for i in range(n):
            a, b = self.edges[i], self.edges[(i + 1) % n]
            if a.y.sign() < 0 <= b.y.sign() or (a.y.sign() >= 0 > b.y.sign()):
                crossings += 1
        if crossings > 2:
            raise NonConvexPolygon("polygon winds more than once")
        self.area2 = sum((self.vertices[i].cross(self.vertices[(i + 1) % n]) for i in range(n)), fld.zero)
        if self.area2.sign() <= 0:
            raise NonConvexPolygon("polygon is not counterclockwise")

    def __len__(self):
        return len(self.vertices)

    @property
    def area(self):
        return self.area2 / 2

    def contains(self, pos: Vec, strict=False) -> bool:
        n = len(self.vertices)
        for i in range(n):
            s = self.edges[i].cross(pos - self.vertices[i]).sign()
            if s < 0 or (strict and s == 0):
                return False
        return True

    def transformed(self, m):
        (a, b), (c, d) = m
        return Polygon([Vec(a * v.x + b * v.y, c * v.x + d * v.y) for v in self.vertices], self.field)


@dataclass(frozen=True)
class RelativeCycle:
    """Integer weights on (representative-oriented) edge classes."""

    weights: tuple  # (class index, weight) pairs, sorted, nonzero weights

    @classmethod
    def from_classes(cls, mapping):
        return cls(tuple(sorted((int(c), int(w)) for c, w in dict(mapping).items() if w)))

    @classmethod
    def from_edges(cls, surface: "TranslationSurface", mapping):
        """Weights given on arbitrary edges, each oriented as its own polygon edge."""
        acc = {}
        for ref, w in dict(mapping).items():
            ref = EdgeRef(*ref)
            c = surface.class_of[ref]
            s = 1 if surface.is_rep[ref] else -1
            acc[c] = acc.get(c, 0) + s * w
        return cls.from_classes(acc)

    def as_dict(self):
        return dict(self.weights)

    def is_zero(self):
        return not self.weights

    def __add__(self, other):
        acc = self.as_dict()
        for c, w in other.weights:
            acc[c] = acc.get(c, 0) + w
        return RelativeCycle.from_classes(acc)

    def __neg__(self):
        return RelativeCycle(tuple((c, -w) for c, w in self.weights))


# a crossing word is a tuple of (edge class, sign) pairs
EdgeCrossingWord = tuple


def reverse_word(word):
    return tuple((c, -s) for c, s in reversed(word))


class TranslationSurface:
    """Polygons glued edge to edge by translations.

    Build through :func:`build_surface`; instances are treated as immutable.
    """

    def __init__(self, polygons, gluing, marked=(), *, _check=True):
        polys = list(polygons)
        if not polys:
            raise SurfaceError("no polygons")
        fld = common_field([p.field.gen for p in polys])
        polys = [p if p.field is fld else Polygon(p.vertices, fld) for p in polys]
        self.field = fld
        self.polygons = tuple(polys)
        glue = {}
        for a, b in dict(gluing).items():
            a, b = EdgeRef(*a), EdgeRef(*b)
            for x, y in ((a, b), (b, a)):
                if glue.get(x, y) != y:
                    raise DanglingEdge(f"edge {x} glued twice")
                glue[x] = y
        all_edges = [EdgeRef(p, i) for p, poly in enumerate(polys) for i in range(len(poly))]
        for ref in all_edges:
            if ref not in glue:
                raise DanglingEdge(f"edge {ref} is not glued")
            if glue[ref] == ref:
                raise DanglingEdge(f"edge {ref} glued to itself")
        for ref in glue:
            if ref.polygon >= len(polys) or ref.edge >= len(polys[ref.polygon]):
                raise DanglingEdge(f"edge {ref} does not exist")
        self.gluing = glue
        if _check:
            for a, b in glue.items():
                if self.edge_vector(a) != -self.edge_vector(b):
                    raise EdgeVectorMismatch(f"edges {a} and {b} are not related by a translation")
        self.edge_classes = tuple(r for r in all_edges if r < glue[r])
        self.class_of = {}
        self.is_rep = {}
        for c, r in enumerate(self.edge_classes):
            self.class_of[r] = c
            self.class_of[glue[r]] = c
            self.is_rep[r] = True
            self.is_rep[glue[r]] = False
        # crossing sign when leaving a polygon through the edge
        self.exit_sign = {r: (-1 if self.is_rep[r] else 1) for r in all_edges}
        # translation carrying a point of edge ref onto the glued edge
        self.shift = {}
        for a, b in glue.items():
            pa, pb = polys[a.polygon], polys[b.polygon]
            self.shift[a] = pb.vertices[b.edge] - pa.vertices[(a.edge + 1) % len(pa)]
        self._vertex_classes()
        self._marked_input = tuple(sorted(set(int(m) for m in marked)))
        singular = {v for v, m in enumerate(self.angle_multiples) if m != 1}
        if not singular and not self._marked_input:
            raise EmptySingularSet("no singularity and no marked point")
        for m in self._marked_input:
            if not 0 <= m < len(self.vertex_classes):
                raise SurfaceError(f"marked vertex class {m} does not exist")
        missing = [v for v in range(len(self.vertex_classes)) if v not in singular and v not in self._marked_input]
        if missing:
            raise UnmarkedVertex(
                f"vertex classes {missing} have cone angle 2*pi and must be marked explicitly"
            )
        self.marked = frozenset(range(len(self.vertex_classes)))
        V, E, F = len(self.vertex_classes), len(self.edge_classes), len(polys)
        chi = V - E + F
        if chi % 2:
            raise SurfaceError("odd Euler characteristic")
        self.genus = (2 - chi) // 2
        if sum(m - 1 for m in self.angle_multiples) != 2 * self.genus - 2:
            raise SurfaceError("Gauss-Bonnet violated: cone angles inconsistent with genus")
        self.area = sum((p.area for p in polys), fld.zero)

    # -- combinatorics -------------------------------------------------------
    def _vertex_classes(self):
        corner_class = {}
        classes = []
        for p, poly in enumerate(self.polygons):
            for i in range(len(poly)):
                if (p, i) in corner_class:
                    continue
                cid = len(classes)
                cycle = []
                cur = (p, i)
                while cur not in corner_class:
                    corner_class[cur] = cid
                    cycle.append(cur)
                    cur = self.next_corner_ccw(*cur)
                if cur != (p, i):
                    raise SurfaceError("corner traversal did not close up")
                classes.append(tuple(cycle))
        self.vertex_classes = tuple(classes)
        self.corner_class = corner_class
        ref = Vec(self.field.one, self.field.zero)
        mults = []
        for cyc in classes:
            count = 0
            for p, i in cyc:
                poly = self.polygons[p]
                n = len(poly)
                a = poly.edges[i]
                b = -poly.edges[(i - 1) % n]
                if a.cross(ref).sign() >= 0 and ref.cross(b).sign() > 0:
                    if a.cross(ref).sign() > 0 or a.dot(ref).sign() > 0:
                        count += 1
            mults.append(count)
        self.angle_multiples = tuple(mults)

    def next_corner_ccw(self, p, i):
        n = len(self.polygons[p])
        q, j = self.gluing[EdgeRef(p, (i - 1) % n)]
        return (q, j)

    def edge_vector(self, ref) -> Vec:
        p, i = ref
        return self.polygons[p].edges[i]

    def class_vector(self, c) -> Vec:
        return self.edge_vector(self.edge_classes[c])

    def vertex_class_of(self, p, i):
        return self.corner_class[(p, i % len(self.polygons[p]))]

    @property
    def marked_input(self):
        return self._marked_input

    def regular_vertex_classes(self):
        return [v for v, m in enumerate(self.angle_multiples) if m == 1]

    # -- homology ------------------------------------------------------------
    @cached_property
    def _dual_homology(self):
        E, F, V = len(self.edge_classes), len(self.polygons), len(self.vertex_classes)
        d1 = [[0] * E for _ in range(F)]
        for c, r in enumerate(self.edge_classes):
            d1[r.polygon][c] += 1
            d1[self.gluing[r].polygon][c] -= 1
        d2 = [[0] * V for _ in range(E)]
        for v, cyc in enumerate(self.vertex_classes):
            for p, i in cyc:
                ref = EdgeRef(p, (i - 1) % len(self.polygons[p]))
                d2[self.class_of[ref]][v] += self.exit_sign[ref]
        s1 = smith_normal_form(d1)
        r1 = s1.rank
        kdim = E - r1
        # loops around vertices written in kernel coordinates
        vinv_d2 = [matvec(s1.Vinv, [d2[e][v] for e in range(E)]) for v in range(V)]
        if any(any(col[:r1]) for col in vinv_d2):
            raise SurfaceError("vertex loops are not cycles of the dual graph")
        bk = [[vinv_d2[v][r1 + a] for v in range(V)] for a in range(kdim)]
        s2 = smith_normal_form(bk) if kdim else None
        r2 = s2.rank if s2 else 0
        if any(d != 1 for d in (s2.invariants if s2 else [])):
            raise SurfaceError("homology has torsion")
        if kdim - r2 != 2 * self.genus:
            raise SurfaceError("rank of H_1 disagrees with the genus")
        return s1, r1, kdim, s2, r2

    def word_chain(self, word):
        z = [0] * len(self.edge_classes)
        for c, s in word:
            z[c] += s
        return z

    def punctured_class(self, word):
        """Coordinates of a closed crossing word in ``H_1(M - P; Z)``."""
        s1, r1, kdim, _, _ = self._dual_homology
        y = matvec(s1.Vinv, self.word_chain(word))
        if any(y[:r1]):
            raise SurfaceError("crossing word is not closed")
        return tuple(y[r1:])

    def absolute_class(self, word):
        """Coordinates of a closed crossing word in a basis of ``H_1(M; Z)``."""
        _, _, kdim, s2, r2 = self._dual_homology
        y = list(self.punctured_class(word))
        if s2 is None:
            return ()
        return tuple(matvec(s2.U, y)[r2:])

    def relative_boundary(self, w: RelativeCycle):
        out = [0] * len(self.vertex_classes)
        for c, wt in w.weights:
            p, i = self.edge_classes[c]
            out[self.vertex_class_of(p, i + 1)] += wt
            out[self.vertex_class_of(p, i)] -= wt
        return out

    def is_boundary(self, w: RelativeCycle) -> bool:
        """True when ``w`` is zero in ``H_1(M, P; Z)``."""
        E, F = len(self.edge_classes), len(self.polygons)
        d2 = [[0] * F for _ in range(E)]
        for p, poly in enumerate(self.polygons):
            for i in range(len(poly)):
                ref = EdgeRef(p, i)
                d2[self.class_of[ref]][p] += 1 if self.is_rep[ref] else -1
        target = [0] * E
        for c, wt in w.weights:
            target[c] = wt
        return solve_integer(d2, target) is not None

    # -- geometry ------------------------------------------------------------
    def transform(self, m) -> "TranslationSurface":
        """Image under an orientation preserving linear map ``((a, b), (c, d))``."""
        (a, b), (c, d) = m
        if (a * d - b * c).sign() <= 0:
            raise SurfaceError("linear map must have positive determinant")
        polys = [p.transformed(m) for p in self.polygons]
        return TranslationSurface(polys, self.gluing, self._marked_input, _check=False)

    def base_change(self, fld: Field) -> "TranslationSurface":
        """Same surface with coordinates viewed in the larger field ``fld``."""
        if fld == self.field:
            return self
        if self.field.degree > 1:
            raise SurfaceError("surface coordinates do not embed in that field")
        cache = self.__dict__.setdefault("_base_changes", {})
        out = cache.get(fld)
        if out is None:
            polys = [Polygon(p.vertices, fld) for p in self.polygons]
            out = cache[fld] = TranslationSurface(polys, self.gluing, self._marked_input, _check=False)
        return out

    def random_point(self, rng: _random.Random, bits=20):
        """Exact uniformly distributed point (dyadic barycentric coordinates)."""
        weights = [float(p.area) for p in self.polygons]
        p = rng.choices(range(len(self.polygons)), weights=weights)[0]
        poly = self.polygons[p]
        v = poly.vertices
        tri_w = [float((v[k] - v[0]).cross(v[k + 1] - v[0])) for k in range(1, len(v) - 1)]
        k = rng.choices(range(1, len(v) - 1), weights=tri_w)[0]
        scale = 2**bits
        while True:
            u = Fraction(rng.randrange(1, scale), scale)
            t = Fraction(rng.randrange(1, scale), scale)
            if u + t == 1:
                continue
            if u + t > 1:
                u, t = 1 - u, 1 - t
            if k > 1 and t == 0:
                continue
            pos = v[0] + (v[k] - v[0]) * u + (v[k + 1] - v[0]) * t
            return p, pos

    def locate_vertex(self, p, pos):
        """Index of the vertex of polygon ``p`` equal to ``pos`` or ``None``."""
        for j, v in enumerate(self.polygons[p].vertices):
            if v == pos:
                return j
        return None

    def __repr__(self):
        return (
            f"<TranslationSurface genus={self.genus} polygons={len(self.polygons)} "
            f"field={self.field!r}>"
        )


def build_surface(polygons, gluing, marked_points=()) -> TranslationSurface:
    polys = [p if isinstance(p, Polygon) else Polygon(p) for p in polygons]
    return TranslationSurface(polys, gluing, marked_points)


def cone_angles(surface: TranslationSurface):
    """``(vertex class, angle / pi)`` pairs; angles are exact even multiples of pi."""
    return [(v, 2 * m) for v, m in enumerate(surface.angle_multiples)]


def intersection_number(w: RelativeCycle, path) -> int:
    weights = w.as_dict()
    return sum(s * weights.get(c, 0) for c, s in path)


def holonomy(surface: TranslationSurface, w: RelativeCycle) -> Vec:
    fld = surface.field
    x, y = fld.zero, fld.zero
    for c, wt in w.weights:
        v = surface.class_vector(c)
        x = x + v.x * wt
        y = y + v.y * wt
    return Vec(x, y)


def core_curve_span_index(surface: TranslationSurface, core_classes):
    """Index of the span of absolute classes in ``H_1(M; Z)``; ``None`` if infinite."""
    rows = [list(r) for r in core_classes]
    return lattice_index(rows, 2 * surface.genus)
