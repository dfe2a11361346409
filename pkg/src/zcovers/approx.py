"""Stage quantities of approximating strips and the rectangle predicate.

For a strip with holonomy ``v`` and area ``A`` (the area of the base
cylinder), the half-height is ``h = A / (2|v|)`` and the band half-width is
``eta = eps^2 / (8|v|)``.  Quantities involving ``|v|`` are stored squared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cover import CoverSpec, LiftClass, classify_cylinder_lift
from .cylinders import Decomposition, cylinder_decomposition
from .flow import Direction
from .numfield import FieldElement, Vec


class BadEps(ValueError):
    pass


class NotAStrip(ValueError):
    pass


def as_eps(eps):
    q = Fraction(eps).limit_denominator(10**12) if isinstance(eps, float) else Fraction(eps)
    if not 0 < q < 1:
        raise BadEps(f"eps must lie in (0, 1), got {eps}")
    return q


def dilation_factor(eps):
    q = as_eps(eps)
    return (1 - q / 2) / (1 - q)


@dataclass(frozen=True)
class StageData:
    strip: LiftClass
    n: int
    v_n: Vec
    A_n: object
    h2: object  # h_n ** 2 = A^2 / (4 |v|^2)
    eta2: object  # eta_n ** 2 = eps^4 / (64 |v|^2)
    c: Fraction
    eps: Fraction

    @property
    def h(self):
        return math.sqrt(float(self.h2))

    @property
    def eta(self):
        return math.sqrt(float(self.eta2))

    def band_fits(self):
        """Exact test of ``2 eta <= (eps / 2) h`` (squares of nonnegative sides)."""
        return (4 * self.eta2 - self.eps**2 / 4 * self.h2).sign() <= 0

    def meets_area_floor(self):
        return (self.A_n - self.A_n.field(self.eps)).sign() >= 0


def stage_quantities(strip: LiftClass, eps, n=0) -> StageData:
    if not strip.k:
        raise NotAStrip("the cylinder lifts to closed cylinders")
    q = as_eps(eps)
    v2 = strip.v.norm2()
    A = strip.area
    return StageData(strip, n, strip.v, A, A * A / (4 * v2), v2.field(q**4) / (64 * v2),
                     dilation_factor(q), q)


@dataclass(frozen=True)
class StripRef:
    """A strip located on the base surface: a cylinder of a decomposition."""

    decomposition: Decomposition
    index: int
    lift: LiftClass

    @property
    def cylinder(self):
        return self.decomposition.cylinders[self.index]


def strips_in_direction(cover: CoverSpec, theta, L_max):
    dec = cylinder_decomposition(cover.base, theta, L_max)
    if not dec:
        return []
    out = []
    for i, cyl in enumerate(dec.cylinders):
        lc = classify_cylinder_lift(cover, cyl)
        if lc.is_strip:
            out.append(StripRef(dec, i, lc))
    return out


def admits_rectangle(cover: CoverSpec, x, strip: StripRef, eps, theta=None) -> bool:
    """Does the dilated rectangle with corners ``x`` and ``S^k x`` fit in the strip?

    The rectangle has sides along ``theta`` and its perpendicular; inside the
    strip it spans ``|v . e| |v ^ e| / |v|`` on either side of the line through
    ``x`` parallel to the core.  The test is exact:
    ``|offset of x| + c * that span < half-height``.
    """
    if not strip.lift.k:
        raise NotAStrip("the cylinder lifts to closed cylinders")
    c = dilation_factor(eps)
    dec = strip.decomposition
    theta = strip.cylinder.direction if theta is None else Direction.of(theta)
    if not theta.exact:
        return admits_rectangle_float(cover, x, strip, eps, theta.angle())
    p, pos = x
    loc = dec.locate(p, pos)
    if loc is None or loc[0] != strip.index:
        return False
    off = loc[1]
    v = strip.lift.v
    fld = off.field
    u = Vec(fld(theta.v.x), fld(theta.v.y))
    lam = v.x / dec.direction.v.x if dec.direction.v.x.sign() else v.y / dec.direction.v.y
    # lam |off| + c |v.u| |v^u| / |u|^2 < A / 2
    span = abs(v.dot(u)) * abs(v.cross(u)) / u.norm2()
    lhs = lam * abs(off) + fld(c) * span
    return (lhs - strip.lift.area / 2).sign() < 0


def admits_rectangle_float(cover, x, strip: StripRef, eps, theta: float) -> bool:
    c = float(dilation_factor(eps))
    dec = strip.decomposition
    p, pos = x
    px, py = (float(t) for t in (pos.to_float() if isinstance(pos, Vec) else pos))
    loc = dec.locate_float(p, px, py)
    if loc is None or loc[0] != strip.index:
        return False
    dv = dec.direction.floats()
    off = abs(loc[1]) / math.hypot(*dv)
    vx, vy = strip.lift.v.to_float()
    nv = math.hypot(vx, vy)
    ux, uy = math.cos(theta), math.sin(theta)
    span = abs(vx * ux + vy * uy) * abs(vx * uy - vy * ux) / nv
    return off + c * span < float(strip.lift.area) / (2 * nv)


def sample_points(surface, n, rng: np.random.Generator):
    """``n`` uniform float points as arrays ``(polygon, x, y)``."""
    tris = []
    for p, poly in enumerate(surface.polygons):
        v = [q.to_float() for q in poly.vertices]
        for k in range(1, len(v) - 1):
            a, b, c = np.array(v[0]), np.array(v[k]), np.array(v[k + 1])
            area = 0.5 * abs((b - a)[0] * (c - a)[1] - (b - a)[1] * (c - a)[0])
            tris.append((p, a, b, c, area))
    w = np.array([t[4] for t in tris])
    idx = rng.choice(len(tris), size=n, p=w / w.sum())
    r1 = rng.random(n)
    r2 = rng.random(n)
    flip = r1 + r2 > 1
    r1[flip], r2[flip] = 1 - r1[flip], 1 - r2[flip]
    A = np.array([t[1] for t in tris])[idx]
    B = np.array([t[2] for t in tris])[idx]
    C = np.array([t[3] for t in tris])[idx]
    pts = A + (B - A) * r1[:, None] + (C - A) * r2[:, None]
    polys = np.array([t[0] for t in tris])[idx]
    return polys, pts[:, 0], pts[:, 1]


@dataclass(frozen=True)
class MeasureEstimate:
    estimate: float
    radius: float  # 95% binomial confidence radius
    sigma: float
    samples: int
    seed: int
    hits: int


def sigma_prime_measure(cover: CoverSpec, strip: StripRef, eps, samples: int, seed: int):
    """Monte Carlo area of the points of ``M`` within ``eta`` of the strip's core line."""
    if samples < 100:
        raise ValueError("use at least 100 samples")
    stage = stage_quantities(strip.lift, eps)
    eta = stage.eta
    rng = np.random.Generator(np.random.Philox(seed))
    surface = cover.base
    polys, xs, ys = sample_points(surface, samples, rng)
    dec = strip.decomposition
    dv = dec.direction.floats()
    ndv = math.hypot(*dv)
    levels = dec.float_levels()
    hits = 0
    ny_all = -dv[1] * xs + dv[0] * ys
    for p in range(len(surface.polygons)):
        mask = polys == p
        if not mask.any():
            continue
        ny = ny_all[mask]
        lv = np.array(levels[p])
        k = np.searchsorted(lv, ny, side="right") - 1
        k = np.clip(k, 0, len(lv) - 2)
        mids = (lv[k] + lv[k + 1]) / 2
        cyl = np.array([dec.slab_cylinder[(p, int(j))] for j in range(len(lv) - 1)])[k]
        off = np.abs(ny - mids) / ndv
        hits += int(((cyl == strip.index) & (off < eta)).sum())
    area = float(surface.area)
    frac = hits / samples
    sigma = math.sqrt(frac * (1 - frac) / samples) * area
    return MeasureEstimate(frac * area, 1.96 * sigma, sigma, samples, seed, hits)
