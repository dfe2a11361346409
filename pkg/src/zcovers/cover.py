"""Z-covers of a translation surface determined by a relative cycle."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .cylinders import Cylinder, Decomposition, cylinder_decomposition
from .flow import Direction, trace
from .numfield import Vec
from .surface import (
    RelativeCycle,
    SurfaceError,
    TranslationSurface,
    core_curve_span_index,
    holonomy,
    intersection_number,
)


class ZeroCycle(SurfaceError):
    pass


class BoundaryNotInP(SurfaceError):
    pass


class NonRecurrentWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class CoverSpec:
    base: TranslationSurface
    w: RelativeCycle
    recurrent: bool
    name: str = "w"

    def warn_if_transient(self):
        if not self.recurrent:
            warnings.warn("cover has nonzero holonomy; the lifted flow is not recurrent",
                          NonRecurrentWarning, stacklevel=3)


@dataclass(frozen=True)
class CoverPoint:
    polygon: int
    position: Vec
    level: int = 0


def make_cover(surface: TranslationSurface, w: RelativeCycle, name="w") -> CoverSpec:
    if w.is_zero() or surface.is_boundary(w):
        raise ZeroCycle("the cycle is zero in relative homology")
    boundary = surface.relative_boundary(w)
    if any(b and v not in surface.marked for v, b in enumerate(boundary)):
        raise BoundaryNotInP("the cycle has boundary outside the marked set")
    hol = holonomy(surface, w)
    return CoverSpec(surface, w, hol.is_zero(), name)


@dataclass(frozen=True)
class LiftClass:
    kind: str  # "ClosedCylinder" or "Strip"
    k: int
    v: Vec
    area: object

    @property
    def is_strip(self):
        return self.kind == "Strip"


def classify_cylinder_lift(cover: CoverSpec, cyl: Cylinder) -> LiftClass:
    k = intersection_number(cover.w, cyl.core_word)
    return LiftClass("Strip" if k else "ClosedCylinder", k, cyl.hol, cyl.area)


def cocycle(cover: CoverSpec, x, theta, t) -> int:
    """Signed count of crossings of the flow segment ``[x, phi_t x)`` with ``w``."""
    cover.warn_if_transient()
    if t == 0:
        return 0
    tr = trace(cover.base, x, theta, time=t, record=False)
    return intersection_number(cover.w, tr.word)


def lift_trace(cover: CoverSpec, point: CoverPoint, theta, t):
    """Trace on the cover; returns the trajectory (its ``level`` is the end sheet)."""
    cover.warn_if_transient()
    return trace(cover, (point.polygon, point.position), theta, time=t, level=point.level,
                 record=False)


@dataclass
class StripReport:
    verdict: str
    witnesses: list = field(default_factory=list)  # (direction, cylinder index, LiftClass)
    lifts: list = field(default_factory=list)  # (direction, [LiftClass, ...])
    span_index: object = None
    directions_checked: int = 0
    directions_periodic: int = 0
    absolute: bool = False
    L_max: object = None

    @property
    def conclusive(self):
        return self.verdict != "inconclusive at this bound"


def strips_exist_certificate(cover: CoverSpec, directions, L_max) -> StripReport:
    """Look for strips among the given directions and apply the index criterion.

    ``directions`` may mix plain directions and ``(direction, decomposition)``
    pairs as produced by :func:`zcovers.cylinders.periodic_directions`.
    """
    surface = cover.base
    report = StripReport("inconclusive at this bound", L_max=L_max)
    cores = []
    for item in directions:
        if isinstance(item, tuple) and len(item) == 2 and isinstance(item[1], Decomposition):
            d, dec = item
        else:
            d = Direction.of(item)
            dec = cylinder_decomposition(surface, d, L_max)
        report.directions_checked += 1
        if not dec:
            continue
        report.directions_periodic += 1
        lifts = []
        for idx, cyl in enumerate(dec.cylinders):
            lc = classify_cylinder_lift(cover, cyl)
            lifts.append(lc)
            if lc.is_strip:
                report.witnesses.append((d, idx, lc))
            cores.append(surface.absolute_class(cyl.core_word))
        report.lifts.append((d, lifts))
    report.span_index = core_curve_span_index(surface, cores) if surface.genus else 1
    report.absolute = not any(surface.relative_boundary(cover.w))
    if report.witnesses:
        report.verdict = "strips exist"
    elif cover.recurrent and report.absolute and report.span_index is not None:
        # nondegenerate pairing: w is nonzero in absolute homology, so some core pairs with it
        report.verdict = "strips exist by index criterion"
    return report
