"""Surfaces and cycles used throughout the package, with their known properties.

Every builder checks the properties it documents before returning, so a
transcription mistake in a gluing table fails loudly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .cover import classify_cylinder_lift, make_cover
from .cylinders import cylinder_decomposition
from .numfield import QQ, Field, Vec
from .surface import (
    EdgeRef,
    Polygon,
    RelativeCycle,
    TranslationSurface,
    build_surface,
    holonomy,
)
from .veech import GroupElement, parabolic_element


class UnsupportedN(ValueError):
    pass


class ExampleCheckFailed(AssertionError):
    pass


@dataclass
class ExampleBundle:
    name: str
    surface: TranslationSurface
    cycles: dict
    veech_generators: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    strip_directions: list = field(default_factory=list)  # (cycle name, direction Vec)
    default_cycle: str = "w"

    def cover(self, name=None):
        name = name or self.default_cycle
        return make_cover(self.surface, self.cycles[name], name)


def _check(cond, msg):
    if not cond:
        raise ExampleCheckFailed(msg)


def _square(x, y):
    return [(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)]


@lru_cache(maxsize=None)
def sqrt2_field():
    return Field([-2, 0, 1], (1, 2))


@lru_cache(maxsize=None)
def golden_field():
    return Field([-1, -1, 1], (1, 2))


@lru_cache(maxsize=None)
def decagon_field():
    # r = 2 sin(pi / 5), a root of r^4 - 5 r^2 + 5
    return Field([5, 0, -5, 0, 1], (1, Fraction(3, 2)))


def _strip_check(bundle, cycle, direction, L=20):
    cov = make_cover(bundle.surface, bundle.cycles[cycle], cycle)
    dec = cylinder_decomposition(bundle.surface, direction, L)
    _check(dec, f"{bundle.name}: direction {direction} is not periodic at bound {L}")
    lifts = [classify_cylinder_lift(cov, c) for c in dec.cylinders]
    _check(any(lc.is_strip for lc in lifts), f"{bundle.name}: no strip in direction {direction}")
    return dec, lifts


def _parabolics(surface, w, directions, L=20):
    gens = []
    for name, d in directions:
        dec = cylinder_decomposition(surface, d, L)
        if not dec:
            continue
        g = parabolic_element(dec, surface, w, name=name)
        if g is not None:
            gens.append(g)
    return gens


@lru_cache(maxsize=None)
def torus() -> ExampleBundle:
    """Unit square torus with its corner marked; ``h`` is the bottom edge."""
    s = build_surface([_square(0, 0)], {(0, 0): (0, 2), (0, 1): (0, 3)}, [0])
    cycles = {
        "h": RelativeCycle.from_edges(s, {(0, 0): 1}),
        "v": RelativeCycle.from_edges(s, {(0, 1): 1}),
    }
    gens = [GroupElement.from_rows([[1, 1], [0, 1]], "T"), GroupElement.from_rows([[1, 0], [1, 1]], "U")]
    notes = ["square torus; the covers it defines have nonzero holonomy (not recurrent)"]
    return ExampleBundle("torus", s, cycles, gens, notes, default_cycle="h")


@lru_cache(maxsize=None)
def staircase() -> ExampleBundle:
    """Two unit squares ``A`` (polygon 0) and ``B`` (polygon 1) forming a torus.

    Right of ``A`` is ``B`` and right of ``B`` is ``A``; likewise vertically.
    ``w`` is the bottom edge of ``A`` plus its top edge, each oriented
    counterclockwise around ``A``.  Its holonomy vanishes and the associated
    Z-cover is the infinite staircase.
    """
    A, B = 0, 1
    gluing = {
        (A, 1): (B, 3),  # A right -- B left
        (B, 1): (A, 3),  # B right -- A left
        (A, 2): (B, 0),  # A top -- B bottom
        (B, 2): (A, 0),  # B top -- A bottom
    }
    s = build_surface([_square(0, 0), _square(1, 0)], gluing, [0, 1])
    w = RelativeCycle.from_edges(s, {(A, 0): 1, (A, 2): 1})
    b = ExampleBundle("staircase", s, {"w": w})
    _check(holonomy(s, w).is_zero(), "staircase: hol(w) != 0")
    dec, lifts = _strip_check(b, "w", Vec(QQ(1), QQ(1)))
    _check(all(abs(lc.k) == 1 for lc in lifts if lc.is_strip), "staircase: |k| != 1")
    b.strip_directions = [("w", Vec(QQ(1), QQ(1))), ("w", Vec(QQ(1), QQ(-1)))]
    b.veech_generators = _parabolics(
        s, w, [("T2", Vec(QQ(1), QQ(0))), ("U2", Vec(QQ(0), QQ(1)))]
    )
    _check(len(b.veech_generators) == 2, "staircase: expected twists do not lift")
    b.notes = [
        "base: 2-square torus, all four vertices marked (two vertex classes)",
        "w = bottom + top of square A; slope +-1 cylinders lift to strips",
        "generators: horizontal and vertical double twists, both lift to the cover",
    ]
    return b


def _regular_polygon(n, fld, cos_sin, start=(0, 0), phase=0):
    """Regular n-gon of side 1; edge j points at angle ``2 pi (j + phase) / n``."""
    pts = [Vec(fld(start[0]), fld(start[1]))]
    for j in range(n - 1):
        c, s = cos_sin(j + phase)
        pts.append(pts[-1] + Vec(c, s))
    return Polygon(pts, fld)


def _octagon_dirs(j):
    fld = sqrt2_field()
    h = fld.gen / 2
    table = [(1, 0), (h, h), (0, 1), (-h, h), (-1, 0), (-h, -h), (0, -1), (h, -h)]
    c, s = table[j % 8]
    return fld(c), fld(s)


def _decagon_dirs(j):
    fld = decagon_field()
    r = fld.gen
    sqrt5 = 5 - 2 * r * r
    c36 = (1 + sqrt5) / 4
    s36 = r / 2
    c72 = (sqrt5 - 1) / 4
    s72 = r * (1 + sqrt5) / 4
    table = [(fld.one, fld.zero), (c36, s36), (c72, s72), (-c72, s72), (-c36, s36)]
    j %= 10
    if j < 5:
        return table[j]
    c, s = table[j - 5]
    return -c, -s


@lru_cache(maxsize=None)
def double_octagon_hw() -> ExampleBundle:
    """Two regular octagons glued by the labels of the double-octagon figure.

    Edge ``j`` of each octagon points at angle ``j * 45`` degrees.  The figure
    draws edges starting at 45 degrees, so its k-th label sits on edge
    ``(k + 1) mod 8`` here.  The label absent from the drawing pairs the two
    remaining vertical sides and is called ``h``.
    """
    fld = sqrt2_field()
    p0 = _regular_polygon(8, fld, _octagon_dirs)
    p1 = _regular_polygon(8, fld, _octagon_dirs, start=(4, 0))
    # labels by edge index 0..7 (angles 0, 45, ..., 315 degrees)
    labels = [
        ["b", "e", "h", "d", "c", "e", "a", "d"],  # first octagon
        ["c", "f", "a", "g", "b", "f", "h", "g"],  # second octagon
    ]
    where = {}
    for p, row in enumerate(labels):
        for j, lab in enumerate(row):
            where.setdefault(lab, []).append(EdgeRef(p, j))
    gluing = {}
    for lab, refs in sorted(where.items()):
        _check(len(refs) == 2, f"label {lab} must appear twice")
        gluing[refs[0]] = refs[1]
    s = build_surface([p0, p1], gluing)
    # (b) - (c) with both segments oriented left to right
    b_ref, c_ref = where["b"][0], where["c"][0]
    w0 = RelativeCycle.from_edges(s, {b_ref: 1, c_ref: 1})
    _check(s.edge_vector(b_ref) == Vec(fld(1), fld(0)), "b must be the rightward edge")
    _check(s.edge_vector(c_ref) == Vec(fld(-1), fld(0)), "c must be leftward on the first octagon")
    _check(holonomy(s, w0).is_zero(), "double octagon: hol(w0) != 0")
    b = ExampleBundle("double_octagon_hw", s, {"w0": w0}, default_cycle="w0")
    slope1 = Vec(fld(1), fld(1))
    dec, lifts = _strip_check(b, "w0", slope1)
    b_class, c_class = s.class_of[b_ref], s.class_of[c_ref]
    _check(
        any(
            any(c == b_class for c, _ in cyl.core_word) and all(c != c_class for c, _ in cyl.core_word)
            for cyl in dec.cylinders
        ),
        "double octagon: no slope-1 cylinder meets (b) but not (c)",
    )
    b.strip_directions = [("w0", slope1)]
    b.veech_generators = _parabolics(s, w0, _symmetric_directions_8())
    b.notes = [
        "two regular octagons glued by the letter labels of the double-octagon figure",
        "w0 = (b) - (c) with both arcs pointing right; hol(w0) = 0",
        "slope-1 cylinder through (b) avoids (c), hence an infinite strip",
        "generators: multi-twists in the eight directions j*pi/8 (j = 0..7), each lifting to the cover",
    ]
    return b


def _symmetric_directions_8():
    fld = sqrt2_field()
    r = fld.gen
    t = r - 1  # tan(pi / 8)
    out = []
    for name, v in [
        ("P0", (1, 0)), ("P1", (1, t)), ("P2", (1, 1)), ("P3", (t, 1)),
        ("P4", (0, 1)), ("P5", (-t, 1)), ("P6", (-1, 1)), ("P7", (-1, t)),
    ]:
        out.append((name, Vec(fld(v[0]), fld(v[1]))))
    return out


@lru_cache(maxsize=None)
def double_ngon(n: int) -> ExampleBundle:
    """Two regular n-gons, side ``j`` of one glued to side ``j + n/2`` of the other.

    Sides are numbered from the horizontal one; the figure numbering of the
    first polygon is ``j + 3`` (n = 8) and ``j + 4`` with a rotation by
    ``pi / 10`` (n = 10), so the odd-labelled sides are the even-indexed ones
    for n = 8 and the odd-indexed ones for n = 10.
    """
    if n == 8:
        fld = sqrt2_field()
        dirs = _octagon_dirs
        odd = [j for j in range(8) if j % 2 == 0]
    elif n == 10:
        fld = decagon_field()
        dirs = _decagon_dirs
        odd = [j for j in range(10) if j % 2 == 1]
    else:
        raise UnsupportedN(f"double n-gon is built for n = 8 and n = 10 only, not {n}")
    p0 = _regular_polygon(n, fld, dirs)
    p1 = _regular_polygon(n, fld, dirs, start=(5, 0))
    gluing = {(0, j): (1, (j + n // 2) % n) for j in range(n)}
    s = build_surface([p0, p1], gluing)
    w = RelativeCycle.from_edges(s, {(0, j): 1 for j in odd})
    _check(holonomy(s, w).is_zero(), f"Reg_{n}: hol(w) != 0")
    b = ExampleBundle(f"double_ngon_{n}", s, {"w": w})
    c, sn = dirs(1)
    rot = GroupElement.from_rows([[c, -sn], [sn, c]], f"rot{n}")
    if n == 8:
        slope = Vec(fld(1), fld.gen - 1)  # tan(pi / 8)
        _strip_check(b, "w", slope)
        b.strip_directions = [("w", slope)]
        twist = _parabolics(s, w, [("twist", Vec(fld(1), fld(0)))])
        _check(len(twist) == 1, "Reg_8: horizontal twist does not lift")
        b.veech_generators = [rot] + twist
        b.notes = [
            "odd sides 1, 3, 5, 7 of the figure are the sides at angles 90, 180, 270, 0 degrees",
            "direction of slope tan(pi/8) contains a strip",
            "generators: rotation by pi/4 and the horizontal multi-twist",
        ]
    else:
        # the figure's horizontal direction is at angle -pi/10 here, equivalent
        # to pi/10 by the symmetry of the polygons
        c18, s18 = _decagon_half_angle()
        slope = Vec(c18, s18)
        _strip_check(b, "w", slope)
        b.strip_directions = [("w", slope)]
        twists = _parabolics(s, w, [("twist", slope), ("twist0", Vec(fld(1), fld(0)))])
        b.veech_generators = [rot] + twists
        b.notes = [
            "figure sides are rotated by pi/10 relative to this model",
            "roles of the horizontal direction and the direction of slope tan(pi/10) are "
            "exchanged relative to the octagon: the strip sits at angle pi/10 here, which is the "
            "figure's horizontal direction",
            "generators: rotation by pi/5 and multi-twists that lift",
        ]
    return b


def _decagon_half_angle():
    fld = decagon_field()
    r = fld.gen
    sqrt5 = 5 - 2 * r * r
    # cos(pi/10) = sin(2 pi / 5), sin(pi/10) = cos(2 pi / 5)
    return r * (1 + sqrt5) / 4, (sqrt5 - 1) / 4


@lru_cache(maxsize=None)
def wollmilchsau() -> ExampleBundle:
    """Eight unit squares ``Q1..Q8`` (polygons 0..7) as in the Wollmilchsau figure.

    Horizontally ``Q1 Q2 Q3 Q4`` and ``Q5 Q6 Q7 Q8`` are cycles.  Moving up
    from ``Q1, ..., Q8`` leads to ``Q8, Q7, Q6, Q5, Q2, Q1, Q4, Q3``.
    ``w1`` is segment 2 (bottom of ``Q6``) minus segment 4 (bottom of ``Q8``).
    """
    squares = [_square(2 * i, 0) for i in range(4)] + [_square(2 * i + 9, 0) for i in range(4)]
    right = {0: 1, 1: 2, 2: 3, 3: 0, 4: 5, 5: 6, 6: 7, 7: 4}
    up = {0: 7, 1: 6, 2: 5, 3: 4, 4: 1, 5: 0, 6: 3, 7: 2}
    gluing = {}
    for q, r in right.items():
        gluing[(q, 1)] = (r, 3)
    for q, u in up.items():
        gluing[(q, 2)] = (u, 0)
    s = build_surface(squares, gluing)
    w1 = RelativeCycle.from_edges(s, {(5, 0): 1, (7, 0): -1})
    _check(holonomy(s, w1).is_zero(), "Wollmilchsau: hol(w1) != 0")
    b = ExampleBundle("wollmilchsau", s, {"w1": w1}, default_cycle="w1")
    cov = make_cover(s, w1, "w1")
    for d in [(1, 0), (0, 1), (1, 1), (1, -1)]:
        dec = cylinder_decomposition(s, d, 10)
        _check(dec, f"Wollmilchsau: direction {d} not periodic")
        _check(
            all(not classify_cylinder_lift(cov, c).is_strip for c in dec.cylinders),
            f"Wollmilchsau: a cylinder in direction {d} lifts to a strip",
        )
    b.veech_generators = [
        GroupElement.from_rows([[1, 1], [0, 1]], "T"),
        GroupElement.from_rows([[0, -1], [1, 0]], "S"),
    ]
    b.notes = [
        "square-tiled surface of the Wollmilchsau figure, genus 3 with four cone points of angle 4 pi",
        "w1 = segment 2 - segment 4; every cylinder checked lifts to closed cylinders (k = 0)",
        "generators: SL(2, Z) generators of the base surface's Veech group",
    ]
    return b


BUILDERS = {
    "torus": torus,
    "staircase": staircase,
    "double_octagon_hw": double_octagon_hw,
    "reg8": lambda: double_ngon(8),
    "reg10": lambda: double_ngon(10),
    "wollmilchsau": wollmilchsau,
}


def get(name) -> ExampleBundle:
    try:
        return BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown example {name!r}; choose from {', '.join(BUILDERS)}") from None


def all_bundles():
    return [get(n) for n in BUILDERS]
