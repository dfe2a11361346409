"""Finite pieces of Veech-group orbits and the approximation criterion.

Group elements act linearly on the plane.  ``enumerate_group`` explores words
in the generators and their inverses breadth first, expanding only elements
whose entries stay below a bound, so a larger bound always yields a superset.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction

import numpy as np

from .numfield import QQ, FieldElement, Vec


class EmptyStripFamily(ValueError):
    pass


def _is_exact(x):
    return not isinstance(x, float)


@dataclass(frozen=True, eq=False)
class GroupElement:
    a: object
    b: object
    c: object
    d: object
    word: tuple = ()

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if self.exact:
            if det != 1:
                raise ValueError(f"determinant {det} is not 1")
        elif abs(det - 1.0) > 1e-6 * max(1.0, self.max_abs() ** 2):
            raise ValueError(f"determinant {det} is not 1")

    @classmethod
    def from_rows(cls, rows, name="", fld=None):
        (a, b), (c, d) = rows
        if fld is None:
            fld = QQ
            for x in (a, b, c, d):
                if isinstance(x, FieldElement) and x.field.degree > 1:
                    fld = x.field
        a, b, c, d = (fld(x) for x in (a, b, c, d))
        return cls(a, b, c, d, (name,) if name else ())

    @property
    def exact(self):
        return _is_exact(self.a)

    def __mul__(self, o):
        return GroupElement(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
            self.word + o.word,
        )

    def inverse(self, name=None):
        word = tuple(_invert_name(n) for n in reversed(self.word)) if name is None else (name,)
        return GroupElement(self.d, -self.b, -self.c, self.a, word)

    def act(self, vec):
        x, y = vec
        return type(vec)(self.a * x + self.b * y, self.c * x + self.d * y) \
            if isinstance(vec, Vec) else (self.a * x + self.b * y, self.c * x + self.d * y)

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    @cached_property
    def float_entries(self):
        return tuple(float(x) for x in self.entries())

    def act_float(self, vec):
        a, b, c, d = self.float_entries
        x, y = vec
        x, y = float(x), float(y)
        return (a * x + b * y, c * x + d * y)

    def max_abs(self):
        return max(abs(x) for x in self.float_entries)

    def trace(self):
        return self.a + self.d

    def to_float(self):
        return GroupElement(*(float(x) for x in self.entries()), self.word)

    def key(self, projective=True, digits=9):
        e = self.entries()
        if self.exact:
            if projective:
                first = next(x for x in e if x != 0)
                if first.sign() < 0:
                    e = tuple(-x for x in e)
            return tuple((x.nums, x.den) if isinstance(x, FieldElement) else x for x in e)
        if projective:
            first = next(x for x in e if abs(x) > 1e-12)
            if first < 0:
                e = tuple(-x for x in e)
        return tuple(round(x, digits) + 0.0 for x in e)

    def __eq__(self, o):
        return isinstance(o, GroupElement) and self.key(False) == o.key(False)

    def __hash__(self):
        return hash(self.key(False))

    def __repr__(self):
        w = "*".join(self.word) or "id"
        return f"GroupElement([[{self.a}, {self.b}], [{self.c}, {self.d}]], word={w})"


def _invert_name(n):
    return n[:-3] if n.endswith("^-1") else n + "^-1"


def identity(fld=QQ):
    return GroupElement(fld.one, fld.zero, fld.zero, fld.one)


def g_t(t):
    return GroupElement(math.exp(t), 0.0, 0.0, math.exp(-t), (f"g_{t}",))


def r_theta(theta):
    c, s = math.cos(theta), math.sin(theta)
    return GroupElement(c, -s, s, c, (f"r_{theta}",))


def _unchecked(a, b, c, d, word):
    g = object.__new__(GroupElement)
    object.__setattr__(g, "a", a)
    object.__setattr__(g, "b", b)
    object.__setattr__(g, "c", c)
    object.__setattr__(g, "d", d)
    object.__setattr__(g, "word", word)
    return g


def enumerate_group(generators, R, *, projective=True, exact=True, max_word_length=None,
                    max_elements=None):
    """Products of the generators and their inverses with all entries at most ``R``.

    Returns a list in breadth-first order (deterministic).  With
    ``exact=False`` the entries are floats, which is much faster for large
    ``R``; identical elements are then merged after rounding to 9 digits.
    """
    gens = list(generators)
    if not exact:
        gens = [g.to_float() for g in gens]
    if gens:
        start = identity(gens[0].a.field) if gens[0].exact else _unchecked(1.0, 0.0, 0.0, 1.0, ())
    else:
        start = identity()
    moves = []
    for g in gens:
        moves.append(g)
        moves.append(g.inverse())
    moves = [(m.a, m.b, m.c, m.d, m.word) for m in moves]
    if gens and not gens[0].exact:
        return _enumerate_float(moves, R, projective, max_word_length, max_elements)
    seen = {start.key(projective)}
    out = [start]
    queue = deque([(start, 0)])
    while queue:
        g, depth = queue.popleft()
        if max_word_length is not None and depth >= max_word_length:
            continue
        ga, gb, gc, gd = g.a, g.b, g.c, g.d
        for ma, mb, mc, md, mw in moves:
            h = _unchecked(ga * ma + gb * mc, ga * mb + gb * md, gc * ma + gd * mc,
                           gc * mb + gd * md, g.word + mw)
            if h.max_abs() > R:
                continue
            k = h.key(projective)
            if k in seen:
                continue
            seen.add(k)
            out.append(h)
            if max_elements is not None and len(out) >= max_elements:
                return out
            queue.append((h, depth + 1))
    return out


def _enumerate_float(moves, R, projective, max_word_length, max_elements):
    def key(a, b, c, d):
        if projective:
            first = a if abs(a) > 1e-12 else (b if abs(b) > 1e-12 else c)
            if first < 0:
                a, b, c, d = -a, -b, -c, -d
        return (round(a, 9) + 0.0, round(b, 9) + 0.0, round(c, 9) + 0.0, round(d, 9) + 0.0)

    start = (1.0, 0.0, 0.0, 1.0, ())
    seen = {key(1.0, 0.0, 0.0, 1.0)}
    out = [start]
    queue = deque([(start, 0)])
    while queue:
        (ga, gb, gc, gd, gw), depth = queue.popleft()
        if max_word_length is not None and depth >= max_word_length:
            continue
        for ma, mb, mc, md, mw in moves:
            a = ga * ma + gb * mc
            b = ga * mb + gb * md
            c = gc * ma + gd * mc
            d = gc * mb + gd * md
            if abs(a) > R or abs(b) > R or abs(c) > R or abs(d) > R:
                continue
            k = key(a, b, c, d)
            if k in seen:
                continue
            seen.add(k)
            h = (a, b, c, d, gw + mw)
            out.append(h)
            if max_elements is not None and len(out) >= max_elements:
                break
            queue.append((h, depth + 1))
        else:
            continue
        break
    return [_unchecked(*h) for h in out]


@dataclass(frozen=True)
class ApproxWitness:
    gamma: GroupElement
    value: object  # exact squared value or float value
    theta: object
    d: object
    squared: bool = False


def _theta_vector(theta):
    """Exact direction vector (Vec) or unit float pair."""
    if isinstance(theta, Vec):
        return theta
    if hasattr(theta, "v"):
        return theta.v if isinstance(theta.v, Vec) else tuple(theta.v)
    if isinstance(theta, tuple):
        return theta
    return (math.cos(theta), math.sin(theta))


def well_approx_count(x, gammas, theta, d):
    """Number of ``gamma`` with ``|gamma x| |e_theta ^ gamma x| < d``, with witnesses.

    Exact when ``theta`` is an exact vector and the group elements are exact:
    the test is ``|u|^2 (u ^ v)^2 < d^2 |v|^2`` for ``u = gamma x``.
    """
    v = _theta_vector(theta)
    witnesses = []
    exact_theta = isinstance(v, Vec)
    if not exact_theta:
        n = math.hypot(*v)
        v = (v[0] / n, v[1] / n)
    for g in gammas:
        if exact_theta and g.exact:
            u = g.act(x if isinstance(x, Vec) else Vec(*x))
            u2 = u.norm2()
            w = u.cross(v)
            lhs = u2 * w * w
            dq = d if isinstance(d, FieldElement) else Fraction(d)
            rhs = v.norm2() * dq * dq
            if (lhs - rhs).sign() < 0:
                witnesses.append(ApproxWitness(g, lhs / v.norm2(), theta, d, squared=True))
        else:
            ux, uy = g.act_float(x)
            vx, vy = float(v[0]), float(v[1])
            nv = math.hypot(vx, vy)
            val = math.hypot(ux, uy) * abs(ux * vy - uy * vx) / nv
            if val < float(d):
                witnesses.append(ApproxWitness(g, val, theta, d))
    return len(witnesses), witnesses


# -- cusp excursions --------------------------------------------------------------------


def im_i_dot(g):
    """``Im(i . g)`` for the right action ``z . g = (d z - b) / (-c z + a)``."""
    a, b, c, d = (complex(float(x)) for x in g.entries())
    z = 1j
    return ((d * z - b) / (-c * z + a)).imag


@dataclass(frozen=True)
class CuspExcursion:
    t: float
    height: float
    abar: float
    cbar: float


def cusp_excursion(gamma, theta, x, d):
    """Height reached by ``g_t r_theta' gamma`` at ``t = log|gamma x| - log sqrt(d)``.

    The orbit base ``x`` is moved to ``(1, 0)`` by an element of ``SL(2, R)``
    first, so ``(abar, cbar)`` is the image of ``gamma x`` and the height is
    ``1 / (abar^2 + cbar^2)``.
    """
    ux, uy = gamma.act_float(x)
    T = math.hypot(ux, uy)
    t = math.log(T) - 0.5 * math.log(float(d))
    th = _theta_angle(theta)
    tp = math.pi / 2 - th
    c, s = math.cos(tp), math.sin(tp)
    rx, ry = c * ux - s * uy, s * ux + c * uy
    abar, cbar = math.exp(t) * rx, math.exp(-t) * ry
    return CuspExcursion(t, 1.0 / (abar * abar + cbar * cbar), abar, cbar)


def cusp_excursion_matrix(gamma, theta, x, d):
    """Same height computed from the full matrix and the Moebius right action."""
    x1, x2 = (float(c) for c in x)
    n2 = x1 * x1 + x2 * x2
    # g0 x = (1, 0); g0 has determinant one
    g0inv = GroupElement(x1, -x2 / n2, x2, x1 / n2)
    ux, uy = gamma.act_float((x1, x2))
    t = math.log(math.hypot(ux, uy)) - 0.5 * math.log(float(d))
    m = g_t(t) * r_theta(math.pi / 2 - _theta_angle(theta)) * gamma.to_float() * g0inv
    return im_i_dot(m)


def _theta_angle(theta):
    v = _theta_vector(theta)
    return math.atan2(float(v[1]), float(v[0]))


def certify_excursion(gamma, theta, x, d):
    """Interval-arithmetic proof that the excursion height exceeds ``1 / (2 d)``.

    ``theta`` is the float angle used by the sweep, treated as exact input.
    Returns ``(certified, lower bound of height - 1/(2d))``.
    """
    from mpmath import iv, mpf

    iv.prec = 80
    x1, x2 = (_iv(c) for c in x)
    ent = [_iv(c) for c in gamma.entries()]
    ux = ent[0] * x1 + ent[1] * x2
    uy = ent[2] * x1 + ent[3] * x2
    dd = _iv(d)
    T = iv.sqrt(ux * ux + uy * uy)
    t = iv.log(T) - iv.log(iv.sqrt(dd))
    th = iv.mpf(mpf(_theta_angle(theta)))
    tp = iv.pi / 2 - th
    c, s = iv.cos(tp), iv.sin(tp)
    rx, ry = c * ux - s * uy, s * ux + c * uy
    abar, cbar = iv.exp(t) * rx, iv.exp(-t) * ry
    height = 1 / (abar * abar + cbar * cbar)
    gap = height - 1 / (2 * dd)
    return bool(gap.a > 0), float(gap.a)


def _iv(c):
    """Interval enclosing an exact field element, rational or float."""
    from fractions import Fraction

    from mpmath import iv

    if isinstance(c, FieldElement):
        lo, hi = c.approx(200)
        a = iv.mpf(lo.numerator) / lo.denominator
        b = iv.mpf(hi.numerator) / hi.denominator
        return iv.mpf([a.a, b.b])
    if isinstance(c, float):
        return iv.mpf(c)
    q = Fraction(c)
    return iv.mpf(q.numerator) / q.denominator


# -- exceptional set scans ---------------------------------------------------------------


def orbit_vectors(x, gammas, up_to_sign=True, digits=9):
    """Distinct float images ``gamma x`` (identified up to sign by default)."""
    seen = set()
    out = []
    for g in gammas:
        ux, uy = g.act_float(x)
        if up_to_sign and (ux < -1e-12 or (abs(ux) <= 1e-12 and uy < 0)):
            ux, uy = -ux, -uy
        key = (round(ux, digits) + 0.0, round(uy, digits) + 0.0)
        if key not in seen:
            seen.add(key)
            out.append((ux, uy))
    return np.array(out, dtype=float).reshape(-1, 2)


def _mark_arcs(vectors, radius, n_grid):
    """Count, for each grid angle ``pi * j / n_grid``, the vectors ``u`` with
    ``|u|^2 |sin(theta - angle(u))| < radius``.

    Directions are taken modulo ``pi`` since the criterion is sign-blind.
    """
    counts = np.zeros(n_grid + 1, dtype=np.int64)
    if len(vectors) == 0:
        return counts[:-1]
    T2 = np.einsum("ij,ij->i", vectors, vectors)
    ang = np.mod(np.arctan2(vectors[:, 1], vectors[:, 0]), np.pi)
    ratio = np.asarray(radius, dtype=float) / T2
    full = ratio >= 1.0
    counts[0] += int(full.sum())
    counts[n_grid] -= int(full.sum())
    half = np.arcsin(np.clip(ratio[~full], 0.0, 1.0))
    ang = ang[~full]
    step = np.pi / n_grid
    # open arc (ang - half, ang + half) hits grid points j*step with j in (lo, hi)
    lo = np.floor((ang - half) / step).astype(np.int64) + 1
    hi = np.ceil((ang + half) / step).astype(np.int64) - 1
    for a, b in zip(lo.tolist(), hi.tolist()):
        if b < a:
            continue
        if b - a + 1 >= n_grid:
            counts[0] += 1
            counts[n_grid] -= 1
            continue
        a_mod, b_mod = a % n_grid, b % n_grid
        if a_mod <= b_mod:
            counts[a_mod] += 1
            counts[b_mod + 1] -= 1
        else:
            counts[a_mod] += 1
            counts[n_grid] -= 1
            counts[0] += 1
            counts[b_mod + 1] -= 1
    return np.cumsum(counts)[:-1]


@dataclass
class ScanResult:
    grid: int
    excluded_fraction: float
    counts: np.ndarray
    box_counts: list  # (box size, occupied boxes)
    slope: float


def theta_exceptional_scan(x, gammas, d, grid_resolution, *, min_count=1):
    """Grid directions ``pi j / N`` (modulo ``pi``) with fewer than ``min_count`` witnesses.

    The box-count slope is a heuristic diagnostic of the exceptional set.
    """
    n = int(grid_resolution)
    if n <= 0 or n & (n - 1):
        raise ValueError("grid resolution must be a power of two")
    vecs = orbit_vectors(x, gammas)
    counts = _mark_arcs(vecs, float(d), n)
    exc = counts < min_count
    boxes = []
    size = 1
    while size <= n:
        occ = int(exc.reshape(-1, size).any(axis=1).sum())
        boxes.append((size / n, occ))
        size *= 2
    pts = [(math.log(1 / s), math.log(o)) for s, o in boxes if o > 0]
    if len(pts) >= 2:
        xs, ys = np.array(pts).T
        slope = float(np.polyfit(xs, ys, 1)[0])
    else:
        slope = 0.0
    return ScanResult(n, float(exc.mean()), counts, boxes, slope)


# -- strips ------------------------------------------------------------------------------


@dataclass
class StripVerdict:
    verdict: str
    count: int
    k: int
    R: object
    eps: object
    min_count: int
    witnesses: list


def _strip_groups(strips, eps):
    groups = {}
    for s in strips:
        if not s.k:
            continue
        groups.setdefault(abs(s.k), []).append(s)
    if not groups:
        raise EmptyStripFamily("no strips (every cylinder lifts to closed cylinders)")
    return groups


def strip_approx_verdict(cover, strips, theta, eps, min_count, R, gammas):
    """Count orbit strips ``gamma Sigma`` with
    ``|e_theta ^ v| <= (1 - eps) A / (2 |v|)`` and ``A >= eps``.

    ``gammas`` must be elements of the Veech group of the cover (they permute
    strips preserving area and ``k``).  Distinct vectors are counted up to sign.
    """
    groups = _strip_groups(strips, eps)
    best = None
    v = _theta_vector(theta)
    exact_theta = isinstance(v, Vec)
    for k, family in sorted(groups.items()):
        seen = set()
        wit = []
        for s in family:
            if (s.area - _as_field(eps, s.area)).sign() < 0:
                continue
            for g in gammas:
                if exact_theta and g.exact:
                    u = g.act(s.v)
                    if u.x.sign() < 0 or (u.x.sign() == 0 and u.y.sign() < 0):
                        u = -u
                    key = (u.x, u.y)
                    if key in seen:
                        continue
                    w = u.cross(v)
                    bound = (1 - _as_field(eps, u.x)) * s.area / 2
                    if (u.norm2() * w * w - bound * bound * v.norm2()).sign() <= 0:
                        seen.add(key)
                        wit.append((g, u))
                else:
                    ux, uy = g.act_float(s.v.to_float())
                    if ux < -1e-12 or (abs(ux) <= 1e-12 and uy < 0):
                        ux, uy = -ux, -uy
                    key = (round(ux, 9), round(uy, 9))
                    if key in seen:
                        continue
                    vx, vy = (float(c) for c in v)
                    nv = math.hypot(vx, vy)
                    wedge = abs(ux * vy - uy * vx) / nv
                    if wedge <= (1 - float(eps)) * float(s.area) / (2 * math.hypot(ux, uy)):
                        seen.add(key)
                        wit.append((g, (ux, uy)))
        cand = (len(wit), k, wit)
        if best is None or cand[0] > best[0]:
            best = cand
    count, k, wit = best
    verdict = "WellApproximated" if count >= min_count else "InconclusiveAtBound"
    return StripVerdict(verdict, count, k, R, eps, min_count, wit)


def _as_field(eps, like):
    if isinstance(eps, float):
        from fractions import Fraction

        eps = Fraction(eps).limit_denominator(10**9)
    return like.field(eps)


def strip_sweep(strips, thetas, eps, min_count, gammas):
    """Vectorized float version of :func:`strip_approx_verdict` over many angles.

    Returns per-angle counts of distinct qualifying orbit vectors (best ``|k|`` family).
    """
    groups = _strip_groups(strips, eps)
    thetas = np.asarray(thetas, dtype=float)
    ex = np.cos(thetas)
    ey = np.sin(thetas)
    best = np.zeros(len(thetas), dtype=np.int64)
    for k, family in groups.items():
        total = np.zeros(len(thetas), dtype=np.int64)
        # distinct vectors up to sign across the family; equal vectors keep the larger area
        by_key = {}
        for s in family:
            if float(s.area) < float(eps):
                continue
            for ux, uy in orbit_vectors(s.v.to_float(), gammas):
                key = (round(ux, 9) + 0.0, round(uy, 9) + 0.0)
                a = float(s.area)
                if by_key.get(key, (0, 0, -1))[2] < a:
                    by_key[key] = (ux, uy, a)
        if by_key:
            arr = np.array(list(by_key.values()), dtype=float)
            vecs, areas = arr[:, :2], arr[:, 2]
            norms = np.hypot(vecs[:, 0], vecs[:, 1])
            bound = (1 - float(eps)) * areas / (2 * norms)
            for lo in range(0, len(vecs), 4096):
                chunk = slice(lo, lo + 4096)
                wedge = np.abs(np.outer(ey, vecs[chunk, 0]) - np.outer(ex, vecs[chunk, 1]))
                total += (wedge <= bound[chunk]).sum(axis=1)
        best = np.maximum(best, total)
    return best


# -- parabolic elements from cylinder decompositions ------------------------------------


def parabolic_element(decomposition, surface=None, w=None, name=None):
    """Multi-twist fixing a periodic direction, or ``None``.

    The moduli ``circumference / height`` must be pairwise commensurable.  With
    ``t`` their least common multiple the shear ``[[1, t], [0, 1]]`` in the
    direction's frame acts as ``t / m_i`` Dehn twists on cylinder ``i``.  When a
    cycle ``w`` is given the element is returned only if it lifts to the
    cover, i.e. ``sum_i (t / m_i) k_i [core_i] = 0`` in ``H_1(M; Z)``.
    """
    from math import gcd

    cyls = decomposition.cylinders
    m0 = cyls[0].modulus
    ratios = []
    for c in cyls:
        q = c.modulus / m0
        if not q.is_rational():
            return None
        ratios.append(q.to_fraction())
    T0 = 1
    for q in ratios:
        T0 = T0 * q.numerator // gcd(T0, q.numerator)
    t = m0 * T0
    if w is not None:
        from .surface import intersection_number

        total = None
        for c, q in zip(cyls, ratios):
            n = Fraction(T0) / q
            assert n.denominator == 1
            k = intersection_number(w, c.core_word)
            cls = surface.absolute_class(c.core_word)
            term = [int(n) * k * x for x in cls]
            total = term if total is None else [a + b for a, b in zip(total, term)]
        if total and any(total):
            return None
    v = decomposition.direction.v
    s2 = v.norm2()
    # P = B^-1 [[1, t], [0, 1]] B with B = [[a, b], [-b, a]]
    a, b = v.x, v.y
    one = t.field.one
    m11 = one - a * b * t / s2
    m12 = a * a * t / s2
    m21 = -(b * b) * t / s2
    m22 = one + a * b * t / s2
    label = name or f"P({decomposition.direction})"
    return GroupElement(m11, m12, m21, m22, (label,))
