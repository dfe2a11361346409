"""Exact arithmetic in a real algebraic number field.

A :class:`Field` is ``Q(r)`` where ``r`` is the unique real root of a monic
integer polynomial inside a rational isolating interval.  Elements are stored
as integer numerators in the power basis of ``r`` over one positive common
denominator, so reduction modulo the (monic) minimal polynomial never leaves
the integers.

Signs are decided symbolically for zero and otherwise by a floating point
estimate with a rigorous error bound, falling back to exact interval
refinement of the root when the estimate is inconclusive.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import reduce

__all__ = [
    "FieldError",
    "NotMonic",
    "NoSignChange",
    "Reducible",
    "FieldMismatch",
    "Field",
    "FieldElement",
    "Vec",
    "QQ",
    "field_create",
    "fe_sign",
    "fe_approx",
    "as_fraction",
]


class FieldError(ValueError):
    pass


class NotMonic(FieldError):
    pass


class NoSignChange(FieldError):
    pass


class Reducible(FieldError):
    pass


class FieldMismatch(FieldError):
    pass


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"cannot convert {x!r} to a rational")


def _poly_eval(coeffs, x):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _imul(a, b):
    """Product of two rational intervals."""
    p = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return (min(p), max(p))


def _interval_horner(coeffs, iv):
    acc = (Fraction(coeffs[-1]), Fraction(coeffs[-1]))
    for c in reversed(coeffs[:-1]):
        acc = _imul(acc, iv)
        acc = (acc[0] + c, acc[1] + c)
    return acc


class Field:
    """``Q(r)`` for a real root ``r`` of ``min_poly`` (coefficients low to high)."""

    def __init__(self, min_poly, root_interval, *, check=True):
        poly = tuple(int(c) for c in min_poly)
        if len(poly) < 2 or poly[-1] != 1:
            raise NotMonic(f"minimal polynomial {poly} is not monic of degree >= 1")
        self.min_poly = poly
        self.degree = len(poly) - 1
        lo, hi = (as_fraction(root_interval[0]), as_fraction(root_interval[1]))
        if self.degree == 1:
            lo = hi = Fraction(-poly[0])
        elif check:
            if lo >= hi:
                raise NoSignChange("empty root interval")
            if _poly_eval(poly, lo) * _poly_eval(poly, hi) >= 0:
                raise NoSignChange(f"{poly} has no sign change on [{lo}, {hi}]")
            self._check_irreducible_and_isolated(lo, hi)
        self.root_interval = (lo, hi)
        # nested bisection intervals; entry k has width (hi - lo) / 2**k
        self._bisections = [(lo, hi)]
        self._reduce_tail = tuple(-c for c in poly[:-1])
        if self.degree == 1:
            self._root_float = float(lo)
        else:
            a, b = self.root_interval_bits(64)
            self._root_float = float((a + b) / 2)
        self._pow_float = tuple(self._root_float**i for i in range(self.degree))
        self._pow_abs = tuple(abs(p) for p in self._pow_float)
        self._inv_cache = {}

    def _check_irreducible_and_isolated(self, lo, hi):
        import sympy

        x = sympy.Symbol("x")
        p = sympy.Poly(list(reversed(self.min_poly)), x, domain="ZZ")
        if not p.is_irreducible:
            raise Reducible(f"{self.min_poly} is reducible over Q")
        if p.count_roots(lo, hi) != 1:
            raise NoSignChange(f"[{lo}, {hi}] does not isolate a single root")

    # -- root refinement -------------------------------------------------
    def _bisect_to(self, k):
        b = self._bisections
        while len(b) <= k:
            lo, hi = b[-1]
            mid = (lo + hi) / 2
            v = _poly_eval(self.min_poly, mid)
            if v == 0:  # only possible for degree 1
                b.append((mid, mid))
                continue
            if (v > 0) == (_poly_eval(self.min_poly, lo) > 0):
                b.append((mid, hi))
            else:
                b.append((lo, mid))
        return b[k]

    def root_interval_bits(self, bits):
        if self.degree == 1:
            return self.root_interval
        lo, hi = self.root_interval
        k = 0
        target = Fraction(1, 2**bits)
        while (hi - lo) / 2**k > target:
            k += 1
        return self._bisect_to(k)

    # -- constructors ----------------------------------------------------
    def __call__(self, x) -> "FieldElement":
        if isinstance(x, FieldElement):
            if x.field is self:
                return x
            if x.field.degree == 1:
                return FieldElement._from_fraction(self, x.to_fraction())
            if x.field == self:
                return FieldElement._make(self, x.nums, x.den)
            raise FieldMismatch("element belongs to a different field")
        if isinstance(x, str):
            return self.parse(x)
        if isinstance(x, (list, tuple)):
            return self.from_coords(x)
        return FieldElement._from_fraction(self, as_fraction(x))

    def from_coords(self, coords) -> "FieldElement":
        fr = [as_fraction(c) for c in coords]
        if len(fr) > self.degree:
            raise FieldError("too many coordinates")
        fr += [Fraction(0)] * (self.degree - len(fr))
        den = reduce(lambda a, b: a * b // math.gcd(a, b), (f.denominator for f in fr), 1)
        nums = tuple(f.numerator * (den // f.denominator) for f in fr)
        return FieldElement._make(self, nums, den)

    @property
    def gen(self) -> "FieldElement":
        if self.degree == 1:
            return self(self.root_interval[0])
        return self.from_coords([0, 1])

    @property
    def zero(self):
        return FieldElement._make(self, (0,) * self.degree, 1)

    @property
    def one(self):
        return FieldElement._make(self, (1,) + (0,) * (self.degree - 1), 1)

    _TERM = re.compile(r"^([+-]?)([0-9]+(?:\.[0-9]+)?(?:/[0-9]+)?)?(\*?r(?:\^([0-9]+))?)?$")

    def parse(self, text: str) -> "FieldElement":
        """Parse a literal such as ``"1/2 - 3/4*r + r^2"``."""
        s = text.replace(" ", "")
        if not s:
            raise FieldError("empty literal")
        terms = re.findall(r"[+-]?[^+-]+", s)
        if "".join(terms) != s:
            raise FieldError(f"cannot parse literal {text!r}")
        coords = [Fraction(0)] * self.degree
        for t in terms:
            m = self._TERM.match(t)
            if not m or (m.group(2) is None and m.group(3) is None):
                raise FieldError(f"cannot parse term {t!r} in {text!r}")
            sign = -1 if m.group(1) == "-" else 1
            coef = Fraction(m.group(2)) if m.group(2) else Fraction(1)
            power = 0
            if m.group(3):
                power = int(m.group(4)) if m.group(4) else 1
            val = self.gen**power if power >= self.degree else None
            if val is None:
                coords[power] += sign * coef
            else:
                for i, c in enumerate(val.coords()):
                    coords[i] += sign * coef * c
        return self.from_coords(coords)

    def literal(self) -> str:
        poly = " ".join(str(c) for c in self.min_poly)
        lo, hi = self.root_interval
        return f"{poly} ; {lo} {hi}"

    def __eq__(self, other):
        return (
            isinstance(other, Field)
            and self.min_poly == other.min_poly
            and self.root_interval == other.root_interval
        )

    def __hash__(self):
        return hash((self.min_poly, self.root_interval))

    def __repr__(self):
        if self.degree == 1:
            return "QQ"
        return f"Field(min_poly={list(self.min_poly)}, root~{self._root_float:.12g})"

    def __reduce__(self):
        return (_rebuild_field, (self.min_poly, self.root_interval))


_FIELD_CACHE: dict = {}


def _rebuild_field(min_poly, root_interval):
    key = (tuple(min_poly), tuple(root_interval))
    f = _FIELD_CACHE.get(key)
    if f is None:
        f = Field(min_poly, root_interval, check=False)
        _FIELD_CACHE[key] = f
    return f


def field_create(min_poly, root_interval) -> Field:
    f = Field(min_poly, root_interval)
    return _FIELD_CACHE.setdefault((f.min_poly, f.root_interval), f)


QQ = _rebuild_field((0, 1), (Fraction(0), Fraction(0)))


class FieldElement:
    """Immutable element ``sum(nums[i] * r**i) / den`` of a :class:`Field`."""

    __slots__ = ("field", "nums", "den", "_float")

    def __init__(self, *a, **k):
        raise TypeError("use Field(...) to build elements")

    @classmethod
    def _make(cls, field, nums, den):
        g = den
        for n in nums:
            if n:
                g = math.gcd(g, n)
                if g == 1:
                    break
        if not any(nums):
            nums, den = (0,) * field.degree, 1
        elif g != 1:
            nums = tuple(n // g for n in nums)
            den //= g
        self = object.__new__(cls)
        self.field = field
        self.nums = nums
        self.den = den
        self._float = None
        return self

    @classmethod
    def _from_fraction(cls, field, q: Fraction):
        return cls._make(field, (q.numerator,) + (0,) * (field.degree - 1), q.denominator)

    # -- coercion --------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.field is self.field:
                return self, other
            if other.field.degree == 1:
                return self, FieldElement._from_fraction(self.field, other.to_fraction())
            if self.field.degree == 1:
                return FieldElement._from_fraction(other.field, self.to_fraction()), other
            if other.field == self.field:
                return self, FieldElement._make(self.field, other.nums, other.den)
            raise FieldMismatch(f"{self.field!r} vs {other.field!r}")
        if isinstance(other, (int, Fraction)):
            return self, FieldElement._from_fraction(self.field, Fraction(other))
        return None, None

    def coords(self):
        return tuple(Fraction(n, self.den) for n in self.nums)

    def is_rational(self):
        return not any(self.nums[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise FieldError(f"{self} is not rational")
        return Fraction(self.nums[0], self.den)

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        if a.den == b.den:
            return FieldElement._make(a.field, tuple(x + y for x, y in zip(a.nums, b.nums)), a.den)
        return FieldElement._make(
            a.field, tuple(x * b.den + y * a.den for x, y in zip(a.nums, b.nums)), a.den * b.den
        )

    __radd__ = __add__

    def __neg__(self):
        return FieldElement._make(self.field, tuple(-x for x in self.nums), self.den)

    def __sub__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        if a.den == b.den:
            return FieldElement._make(a.field, tuple(x - y for x, y in zip(a.nums, b.nums)), a.den)
        return FieldElement._make(
            a.field, tuple(x * b.den - y * a.den for x, y in zip(a.nums, b.nums)), a.den * b.den
        )

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        d = a.field.degree
        if d == 1:
            return FieldElement._make(a.field, (a.nums[0] * b.nums[0],), a.den * b.den)
        prod = [0] * (2 * d - 1)
        for i, x in enumerate(a.nums):
            if x:
                for j, y in enumerate(b.nums):
                    if y:
                        prod[i + j] += x * y
        tail = a.field._reduce_tail
        for k in range(2 * d - 2, d - 1, -1):
            c = prod[k]
            if c:
                base = k - d
                for i in range(d):
                    if tail[i]:
                        prod[base + i] += c * tail[i]
        return FieldElement._make(a.field, tuple(prod[:d]), a.den * b.den)

    __rmul__ = __mul__

    def inverse(self):
        if not any(self.nums):
            raise ZeroDivisionError("inverse of zero field element")
        d = self.field.degree
        if d == 1:
            return FieldElement._make(self.field, (self.den,), self.nums[0]) if self.nums[0] > 0 else \
                FieldElement._make(self.field, (-self.den,), -self.nums[0])
        key = (self.nums, self.den)
        hit = self.field._inv_cache.get(key)
        if hit is not None:
            return hit
        # column j of the multiplication matrix is self * r**j
        cols = []
        e = self
        r = self.field.gen
        for _ in range(d):
            cols.append(e.coords())
            e = e * r
        m = [[cols[j][i] for j in range(d)] + [Fraction(int(i == 0))] for i in range(d)]
        for c in range(d):
            p = next(i for i in range(c, d) if m[i][c] != 0)
            m[c], m[p] = m[p], m[c]
            piv = m[c][c]
            m[c] = [v / piv for v in m[c]]
            for i in range(d):
                if i != c and m[i][c] != 0:
                    f = m[i][c]
                    m[i] = [vi - f * vc for vi, vc in zip(m[i], m[c])]
        inv = self.field.from_coords([m[i][d] for i in range(d)])
        if len(self.field._inv_cache) < 100000:
            self.field._inv_cache[key] = inv
        return inv

    def __truediv__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        return a * b.inverse()

    def __rtruediv__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        return b * a.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- order -----------------------------------------------------------
    def sign(self) -> int:
        nums = self.nums
        if self.field.degree == 1 or not any(nums[1:]):
            return (nums[0] > 0) - (nums[0] < 0)
        try:
            approx = 0.0
            mag = 0.0
            for n, p, q in zip(nums, self.field._pow_float, self.field._pow_abs):
                fn = float(n)
                approx += fn * p
                mag += abs(fn) * q
            if math.isfinite(mag) and abs(approx) > 1e-12 * mag:
                return 1 if approx > 0 else -1
        except OverflowError:
            pass
        return self._sign_exact()

    def _sign_exact(self) -> int:
        k = 8
        while True:
            lo, hi = _interval_horner(self.nums, self.field._bisect_to(k))
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            k += 8

    def __eq__(self, other):
        if isinstance(other, FieldElement) and other.field is self.field:
            return self.nums == other.nums and self.den == other.den
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        return a.nums == b.nums and a.den == b.den

    def __hash__(self):
        if self.is_rational():
            return hash(Fraction(self.nums[0], self.den))
        return hash((self.nums, self.den))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __bool__(self):
        return any(self.nums)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __float__(self):
        f = self._float
        if f is None:
            try:
                f = sum(float(n) * p for n, p in zip(self.nums, self.field._pow_float)) / self.den
                if not math.isfinite(f):
                    raise OverflowError
            except (OverflowError, ZeroDivisionError):
                lo, hi = self.approx(60)
                f = float((lo + hi) / 2)
            self._float = f
        return f

    def approx(self, precision_bits: int):
        """Rational interval of width <= 2**-precision_bits containing the value."""
        if self.is_rational():
            q = Fraction(self.nums[0], self.den)
            return (q, q)
        target = Fraction(1, 2**precision_bits)
        k = 0
        while True:
            lo, hi = _interval_horner(self.nums, self.field._bisect_to(k))
            lo, hi = lo / self.den, hi / self.den
            if hi - lo <= target:
                return (lo, hi)
            k += 4

    # -- text ------------------------------------------------------------
    def literal(self) -> str:
        parts = []
        for i, c in enumerate(self.coords()):
            if c == 0:
                continue
            mag = abs(c)
            if i == 0:
                body = str(mag)
            else:
                mono = "r" if i == 1 else f"r^{i}"
                body = mono if mag == 1 else f"{mag}*{mono}"
            if not parts:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append(("- " if c < 0 else "+ ") + body)
        return " ".join(parts) if parts else "0"

    def __str__(self):
        return self.literal()

    def __repr__(self):
        return f"<{self.literal()} ~ {float(self):.12g}>"

    def __reduce__(self):
        return (_rebuild_element, (self.field, self.nums, self.den))


def _rebuild_element(field, nums, den):
    return FieldElement._make(field, nums, den)


def fe_arith(a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    """``op`` is one of ``add``, ``sub``, ``mul``, ``div``."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def fe_sign(a: FieldElement) -> int:
    return a.sign()


def fe_approx(a: FieldElement, precision_bits: int):
    if precision_bits < 1:
        raise ValueError("precision_bits must be >= 1")
    return a.approx(precision_bits)


class Vec:
    """Planar vector with exact field coordinates."""

    __slots__ = ("x", "y")

    def __init__(self, x, y):
        self.x = x
        self.y = y

    def __add__(self, o):
        return Vec(self.x + o.x, self.y + o.y)

    def __sub__(self, o):
        return Vec(self.x - o.x, self.y - o.y)

    def __neg__(self):
        return Vec(-self.x, -self.y)

    def __mul__(self, s):
        return Vec(self.x * s, self.y * s)

    __rmul__ = __mul__

    def cross(self, o):
        return self.x * o.y - self.y * o.x

    def dot(self, o):
        return self.x * o.x + self.y * o.y

    def norm2(self):
        return self.x * self.x + self.y * self.y

    def is_zero(self):
        return not self.x and not self.y

    def __eq__(self, o):
        return isinstance(o, Vec) and self.x == o.x and self.y == o.y

    def __hash__(self):
        return hash((self.x, self.y))

    def __iter__(self):
        yield self.x
        yield self.y

    def to_float(self):
        return (float(self.x), float(self.y))

    def __repr__(self):
        return f"Vec({self.x}, {self.y})"

    def __reduce__(self):
        return (Vec, (self.x, self.y))
