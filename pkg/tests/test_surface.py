import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zcovers import examples as ex
from zcovers.cylinders import cylinder_decomposition
from zcovers.numfield import QQ, Vec
from zcovers.surface import (
    DanglingEdge,
    EdgeRef,
    EdgeVectorMismatch,
    EmptySingularSet,
    NonConvexPolygon,
    Polygon,
    RelativeCycle,
    UnmarkedVertex,
    build_surface,
    cone_angles,
    core_curve_span_index,
    holonomy,
    intersection_number,
    reverse_word,
)

SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]
TORUS_GLUE = {(0, 0): (0, 2), (0, 1): (0, 3)}


def corner_angle_oracle(s):
    """Vertex classes by union-find over glued corners and angles by atan2."""
    corners = [(p, i) for p, poly in enumerate(s.polygons) for i in range(len(poly))]
    parent = {c: c for c in corners}

    def find(c):
        while parent[c] != c:
            c = parent[c]
        return c

    for (p, i), (q, j) in s.gluing.items():
        n, m = len(s.polygons[p]), len(s.polygons[q])
        parent[find((p, i))] = find((q, (j + 1) % m))
        parent[find((p, (i + 1) % n))] = find((q, j))
    total = {}
    for p, poly in enumerate(s.polygons):
        pts = [v.to_float() for v in poly.vertices]
        n = len(pts)
        for i in range(n):
            ax, ay = pts[(i + 1) % n][0] - pts[i][0], pts[(i + 1) % n][1] - pts[i][1]
            bx, by = pts[i - 1][0] - pts[i][0], pts[i - 1][1] - pts[i][1]
            r = find((p, i))
            total[r] = total.get(r, 0.0) + math.atan2(ax * by - ay * bx, ax * bx + ay * by)
    return sorted(round(a / math.pi) for a in total.values())


def test_torus():
    s = build_surface([SQUARE], TORUS_GLUE, [0])
    assert len(s.vertex_classes) == 1
    assert cone_angles(s) == [(0, 2)]
    assert s.genus == 1
    assert s.area == 1


def test_dangling_edge():
    with pytest.raises(DanglingEdge):
        build_surface([SQUARE], {(0, 0): (0, 2)}, [0])


def test_edge_vector_mismatch():
    with pytest.raises(EdgeVectorMismatch):
        build_surface([SQUARE], {(0, 0): (0, 1), (0, 2): (0, 3)}, [0])


def test_non_convex_polygon():
    with pytest.raises(NonConvexPolygon):
        Polygon([(0, 0), (2, 0), (1, Fraction(1, 2)), (2, 2), (0, 2)])
    with pytest.raises(NonConvexPolygon):
        Polygon(list(reversed(SQUARE)))


def test_empty_singular_set():
    with pytest.raises(EmptySingularSet):
        build_surface([SQUARE], TORUS_GLUE, [])


def test_unmarked_regular_vertex():
    glue = {(0, 1): (1, 3), (1, 1): (0, 3), (0, 2): (1, 0), (1, 2): (0, 0)}
    right = [(1, 0), (2, 0), (2, 1), (1, 1)]
    with pytest.raises(UnmarkedVertex):
        build_surface([SQUARE, right], glue, [0])


def test_reg8_double_octagon_genus():
    # the corner-angle oracle finds two cone points of angle 6 pi, so genus 3
    s = ex.double_ngon(8).surface
    assert corner_angle_oracle(s) == [6, 6]
    assert s.genus == 3


@pytest.mark.parametrize("name", list(ex.BUILDERS))
def test_gauss_bonnet_against_corner_oracle(name):
    s = ex.get(name).surface
    angles = cone_angles(s)
    assert sorted(a for _, a in angles) == corner_angle_oracle(s)
    assert sum(a - 2 for _, a in angles) == 2 * (2 * s.genus - 2)


def test_wollmilchsau_angles():
    s = ex.wollmilchsau().surface
    assert corner_angle_oracle(s) == [4, 4, 4, 4]
    assert s.genus == 3


def test_intersection_torus():
    s = build_surface([SQUARE], TORUS_GLUE, [0])
    h = RelativeCycle.from_edges(s, {(0, 0): 1})
    up = ((s.class_of[EdgeRef(0, 2)], s.exit_sign[EdgeRef(0, 2)]),)
    assert intersection_number(h, up) == 1
    assert intersection_number(h, ()) == 0


def test_intersection_double_octagon_slope_one():
    b = ex.double_octagon_hw()
    s = b.surface
    w0 = b.cycles["w0"]
    dec = cylinder_decomposition(s, Vec(s.field(1), s.field(1)), 20)
    cb, cc = s.class_of[EdgeRef(0, 0)], s.class_of[EdgeRef(0, 4)]
    through_b = [c for c in dec.cylinders
                 if any(e == cb for e, _ in c.core_word) and all(e != cc for e, _ in c.core_word)]
    assert through_b
    assert all(intersection_number(w0, c.core_word) in (1, -1) for c in through_b)


def test_holonomy_examples():
    s = build_surface([SQUARE], TORUS_GLUE, [0])
    h = RelativeCycle.from_edges(s, {(0, 0): 1})
    assert holonomy(s, h) == Vec(QQ(1), QQ(0))
    reg8 = ex.double_ngon(8)
    assert holonomy(reg8.surface, reg8.cycles["w"]).is_zero()
    assert holonomy(ex.wollmilchsau().surface, ex.wollmilchsau().cycles["w1"]).is_zero()


def test_span_index():
    s = build_surface([SQUARE], TORUS_GLUE, [0])
    a = s.absolute_class(((s.class_of[EdgeRef(0, 1)], -1),))
    b = s.absolute_class(((s.class_of[EdgeRef(0, 2)], 1),))
    assert core_curve_span_index(s, [a, b]) == 1
    assert core_curve_span_index(s, [a]) is None


def test_wollmilchsau_cores_have_infinite_index():
    # Smith normal form oracle: these core classes span a rank-2 sublattice of H_1 (rank 6)
    s = ex.wollmilchsau().surface
    rows = []
    for d in [(1, 0), (0, 1), (1, 1), (1, -1)]:
        rows += [s.absolute_class(c.core_word) for c in cylinder_decomposition(s, d, 10).cylinders]
    import sympy

    assert sympy.Matrix(rows).rank() == 2
    assert core_curve_span_index(s, rows) is None


def test_polygon_boundaries_are_null():
    s = ex.double_octagon_hw().surface
    for p, poly in enumerate(s.polygons):
        w = RelativeCycle.from_edges(s, {(p, i): 1 for i in range(len(poly))})
        assert s.is_boundary(w)
        assert holonomy(s, w).is_zero()
    assert not s.is_boundary(ex.double_octagon_hw().cycles["w0"])


SURFACES = [ex.get(n).surface for n in ("staircase", "double_octagon_hw", "wollmilchsau")]


@st.composite
def cycles_and_word(draw):
    s = draw(st.sampled_from(SURFACES))
    ncls = len(s.edge_classes)
    w1 = RelativeCycle.from_classes({c: draw(st.integers(-3, 3)) for c in range(ncls)})
    w2 = RelativeCycle.from_classes({c: draw(st.integers(-3, 3)) for c in range(ncls)})
    word = tuple(draw(st.lists(st.tuples(st.integers(0, ncls - 1), st.sampled_from([-1, 1])), max_size=12)))
    return s, w1, w2, word


@given(cycles_and_word())
@settings(max_examples=80, deadline=None)
def test_intersection_bilinear_and_reversal(data):
    s, w1, w2, word = data
    assert intersection_number(w1 + w2, word) == intersection_number(w1, word) + intersection_number(w2, word)
    assert intersection_number(w1, reverse_word(word)) == -intersection_number(w1, word)
    chain = RelativeCycle.from_classes(dict(enumerate(s.word_chain(word))))
    back = RelativeCycle.from_classes(dict(enumerate(s.word_chain(reverse_word(word)))))
    assert holonomy(s, back) == -holonomy(s, chain)
    assert holonomy(s, w1 + w2) == holonomy(s, w1) + holonomy(s, w2)


@given(st.sampled_from(SURFACES), st.data())
@settings(max_examples=40, deadline=None)
def test_closed_edge_loop_holonomy_telescopes(s, data):
    # walk around a polygon boundary starting anywhere: the edge vectors telescope to zero
    p = data.draw(st.integers(0, len(s.polygons) - 1))
    poly = s.polygons[p]
    n = len(poly)
    start = data.draw(st.integers(0, n - 1))
    total = Vec(s.field.zero, s.field.zero)
    pos = poly.vertices[start]
    for k in range(n):
        e = s.edge_vector((p, (start + k) % n))
        total = total + e
        pos = pos + e
    assert pos == poly.vertices[start]
    w = RelativeCycle.from_edges(s, {(p, i): 1 for i in range(n)})
    assert holonomy(s, w) == total
