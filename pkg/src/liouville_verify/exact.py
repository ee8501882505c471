"""Exact and certified arithmetic.

Rationals are ``fractions.Fraction``.  On top of that this module provides

* ``QuadExt``: numbers a + b*sqrt(d) with rational a, b, d and exact sign;
* ``RatInterval``: closed intervals with rational endpoints, rounded
  outward to a working precision so that every result is an enclosure;
* certified exp/log/pow on intervals (fixed-point series with explicit
  remainder bounds);
* ``UniPoly``: univariate polynomials over Q with Sturm-sequence root
  counting, used by ``poly_positive_on``.
"""

from __future__ import annotations

import contextvars
import decimal
import math
import os
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt

from .errors import DomainError

Rational = Fraction

DEFAULT_PRECISION = int(os.environ.get("LIOUVILLE_PRECISION", "128"))
MAX_PRECISION = 1024

_precision = contextvars.ContextVar("interval_precision", default=DEFAULT_PRECISION)


def get_precision() -> int:
    return _precision.get()


@contextmanager
def workprec(bits: int):
    """Temporarily set the interval working precision (in bits)."""
    if bits < 16:
        raise DomainError("precision must be at least 16 bits")
    token = _precision.set(int(bits))
    try:
        yield
    finally:
        _precision.reset(token)


def escalating(fn, start=None, stop=MAX_PRECISION):
    """Call ``fn()`` at doubling precision until it returns something other
    than None.  Returns (result, bits) or (None, stop)."""
    bits = start or get_precision()
    while True:
        with workprec(bits):
            out = fn()
        if out is not None or bits >= stop:
            return out, bits
        bits *= 2


def to_rational(x) -> Fraction:
    """Exact conversion: ints, Fractions, decimal strings ("1.7") and ratio
    strings ("9/5").  Floats convert to their exact binary value."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, float)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, decimal.Decimal):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _is_square(x: Fraction) -> bool:
    if x < 0:
        return False
    n, d = x.numerator, x.denominator
    return isqrt(n) ** 2 == n and isqrt(d) ** 2 == d


def _squarefree_split(m: int, bound: int = 1 << 12):
    # m = c^2 * s with trial division by small factors
    c, s = 1, 1
    f = 2
    while f <= bound and f * f <= m:
        while m % (f * f) == 0:
            m //= f * f
            c *= f
        if m % f == 0:
            m //= f
            s *= f
        f += 1 if f == 2 else 2
    return c, s * m


def _normalize_radicand(d: Fraction):
    """Write sqrt(d) = c*sqrt(s) with s a (mostly) squarefree integer."""
    c, s = _squarefree_split(d.numerator * d.denominator)
    return Fraction(c, d.denominator), Fraction(s)


def rational_sqrt(x: Fraction) -> Fraction | None:
    """Exact square root of a rational, or None if irrational."""
    x = to_rational(x)
    if not _is_square(x):
        return None
    return Fraction(isqrt(x.numerator), isqrt(x.denominator))


# ---------------------------------------------------------------------------
# quadratic extension


_MIXED = object()


class QuadExt:
    """a + b*sqrt(d), d > 0 rational and not a rational square."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d):
        a, b, d = to_rational(a), to_rational(b), to_rational(d)
        if d <= 0:
            raise DomainError("radicand must be positive")
        if _is_square(d):
            raise DomainError("radicand is a rational square; use quad() to normalize")
        c, d = _normalize_radicand(d)
        b = b * c
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, value):
        raise AttributeError("QuadExt is immutable")

    @classmethod
    def _raw(cls, a, b, d):
        obj = object.__new__(cls)
        object.__setattr__(obj, "a", a)
        object.__setattr__(obj, "b", b)
        object.__setattr__(obj, "d", d)
        return obj

    @classmethod
    def sqrt(cls, d, coeff=1):
        """coeff*sqrt(d), normalized to a Fraction when d is a square."""
        return quad(0, coeff, d)

    def _lift(self, other):
        if isinstance(other, QuadExt):
            if other.d == self.d:
                return other
            if other.b == 0:
                return QuadExt._raw(other.a, Fraction(0), self.d)
            if self.b == 0:
                return None
            return _MIXED
        if isinstance(other, (int, Fraction)):
            return QuadExt._raw(Fraction(other), Fraction(0), self.d)
        return None

    def _with(self, other):
        # adopt the other's radicand when self is purely rational
        if isinstance(other, QuadExt) and self.b == 0 and other.d != self.d:
            return QuadExt._raw(self.a, self.b, other.d), other
        o = self._lift(other)
        if o is _MIXED:
            # different radicands: no common field, fall back to enclosures
            return self.to_interval(), other.to_interval()
        return self, o

    def __add__(self, other):
        s, o = self._with(other)
        if o is None:
            return NotImplemented
        if isinstance(s, RatInterval):
            return s + o
        return QuadExt._raw(s.a + o.a, s.b + o.b, s.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt._raw(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        s, o = self._with(other)
        if o is None:
            return NotImplemented
        if isinstance(s, RatInterval):
            return s - o
        return QuadExt._raw(s.a - o.a, s.b - o.b, s.d)

    def __rsub__(self, other):
        s, o = self._with(other)
        if o is None:
            return NotImplemented
        if isinstance(s, RatInterval):
            return o - s
        return QuadExt._raw(o.a - s.a, o.b - s.b, s.d)

    def __mul__(self, other):
        s, o = self._with(other)
        if o is None:
            return NotImplemented
        if isinstance(s, RatInterval):
            return s * o
        return QuadExt._raw(s.a * o.a + s.b * o.b * s.d, s.a * o.b + s.b * o.a, s.d)

    __rmul__ = __mul__

    def conjugate(self):
        return QuadExt._raw(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    def inverse(self):
        nm = self.norm()
        if nm == 0:
            raise ZeroDivisionError("QuadExt division by zero")
        return QuadExt._raw(self.a / nm, -self.b / nm, self.d)

    def __truediv__(self, other):
        s, o = self._with(other)
        if o is None:
            return NotImplemented
        if isinstance(s, RatInterval):
            return s / o
        return s * o.inverse()

    def __rtruediv__(self, other):
        s, o = self._with(other)
        if o is None:
            return NotImplemented
        if isinstance(s, RatInterval):
            return o / s
        return o * s.inverse()

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out = QuadExt._raw(Fraction(1), Fraction(0), self.d)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def sign(self) -> int:
        return quad_sign(self)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def rational(self) -> Fraction | None:
        return self.a if self.b == 0 else None

    def _cmp(self, other):
        diff = self - other
        if diff is NotImplemented:
            return None
        if isinstance(diff, RatInterval):
            sg = diff.sign()
            if sg is None:
                raise DomainError("comparison undecided at current precision")
            return sg
        return quad_sign(diff)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, QuadExt)):
            try:
                return self._cmp(other) == 0
            except DomainError:
                return False
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c >= 0

    def to_interval(self) -> "RatInterval":
        if self.b == 0:
            return RatInterval.point(self.a)
        return self.a + self.b * RatInterval.point(self.d).sqrt()

    def __float__(self):
        with workprec(max(get_precision(), 128)):
            return float(self.to_interval().mid)

    def __repr__(self):
        return f"QuadExt({self.a}, {self.b}, {self.d})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        return f"{self.a} + {self.b}*sqrt({self.d})"


def quad(a, b, d):
    """Build a + b*sqrt(d), returning a Fraction when the radical is rational."""
    a, b, d = to_rational(a), to_rational(b), to_rational(d)
    if b == 0:
        return a
    r = rational_sqrt(d)
    if r is not None:
        return a + b * r
    return QuadExt(a, b, d)


def quad_sign(x) -> int:
    """Exact sign of a + b*sqrt(d): compare a^2 with b^2*d when the signs differ."""
    if isinstance(x, (int, Fraction)):
        return _sign(x)
    sa, sb = _sign(x.a), _sign(x.b)
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    # opposite signs: the larger square wins
    c = _sign(x.a * x.a - x.b * x.b * x.d)
    return sa if c > 0 else (sb if c < 0 else 0)


def exact_sign(x):
    """Sign of a Fraction, QuadExt or RatInterval; None when an interval
    straddles zero."""
    if isinstance(x, RatInterval):
        return x.sign()
    return quad_sign(x)


# ---------------------------------------------------------------------------
# intervals


def _round(x: Fraction, up: bool, prec: int) -> Fraction:
    den = x.denominator
    if den.bit_length() <= prec + 8:
        return x
    num = x.numerator
    shift = prec + 4 - (num.bit_length() - den.bit_length())
    if shift >= 0:
        q, r = divmod(num << shift, den)
        if up and r:
            q += 1
        return Fraction(q, 1 << shift)
    q, r = divmod(num, den << (-shift))
    if up and r:
        q += 1
    return Fraction(q << (-shift))


def _coerce(x):
    if isinstance(x, RatInterval):
        return x
    if isinstance(x, (int, Fraction)):
        return RatInterval._mk(Fraction(x), Fraction(x))
    if isinstance(x, QuadExt):
        return x.to_interval()
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError("non-finite float in interval arithmetic")
        f = Fraction(x)
        return RatInterval._mk(f, f)
    return None


class RatInterval:
    """Closed interval [lo, hi] with rational endpoints.

    Arithmetic rounds outward to ``get_precision()`` significant bits, so
    results always enclose the exact value of the operation applied to any
    members of the operands.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = to_rational(lo)
        hi = lo if hi is None else to_rational(hi)
        if lo > hi:
            raise DomainError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, name, value):
        raise AttributeError("RatInterval is immutable")

    @classmethod
    def _mk(cls, lo, hi):
        obj = object.__new__(cls)
        object.__setattr__(obj, "lo", lo)
        object.__setattr__(obj, "hi", hi)
        return obj

    @classmethod
    def _out(cls, lo, hi):
        prec = _precision.get()
        return cls._mk(_round(lo, False, prec), _round(hi, True, prec))

    @classmethod
    def point(cls, x):
        x = to_rational(x)
        return cls._mk(x, x)

    @classmethod
    def hull(cls, *items):
        ivs = [_coerce(i) for i in items]
        return cls._mk(min(i.lo for i in ivs), max(i.hi for i in ivs))

    # -- queries
    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def mag(self) -> Fraction:
        return max(abs(self.lo), abs(self.hi))

    def contains(self, x) -> bool:
        o = _coerce(x)
        return self.lo <= o.lo and o.hi <= self.hi

    def __contains__(self, x):
        return self.contains(x)

    def sign(self):
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == 0 and self.hi == 0:
            return 0
        return None

    def is_positive(self) -> bool:
        return self.lo > 0

    def is_negative(self) -> bool:
        return self.hi < 0

    def certainly_lt(self, other) -> bool:
        return self.hi < _coerce(other).lo

    def certainly_le(self, other) -> bool:
        return self.hi <= _coerce(other).lo

    def certainly_gt(self, other) -> bool:
        return self.lo > _coerce(other).hi

    def certainly_ge(self, other) -> bool:
        return self.lo >= _coerce(other).hi

    def intersect(self, other):
        o = _coerce(other)
        lo, hi = max(self.lo, o.lo), min(self.hi, o.hi)
        return None if lo > hi else RatInterval._mk(lo, hi)

    def split(self, k=2):
        step = self.width / k
        pts = [self.lo + i * step for i in range(k)] + [self.hi]
        return [RatInterval._mk(pts[i], pts[i + 1]) for i in range(k)]

    # -- arithmetic
    def __add__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return RatInterval._out(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return RatInterval._mk(-self.hi, -self.lo)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return RatInterval._out(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        a, b, c, d = self.lo, self.hi, o.lo, o.hi
        if a == b and c == d:
            v = a * c
            return RatInterval._out(v, v)
        if a >= 0 and c >= 0:
            return RatInterval._out(a * c, b * d)
        ps = (a * c, a * d, b * c, b * d)
        return RatInterval._out(min(ps), max(ps))

    __rmul__ = __mul__

    def reciprocal(self):
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval division by an interval containing zero")
        return RatInterval._out(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o * self.reciprocal()

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RatInterval._mk(Fraction(0), max(-self.lo, self.hi))

    def __pow__(self, k):
        if isinstance(k, int) or (isinstance(k, Fraction) and k.denominator == 1):
            k = int(k)
            if k < 0:
                return (self ** (-k)).reciprocal()
            if k == 0:
                return RatInterval._mk(Fraction(1), Fraction(1))
            if k % 2 == 1 or self.lo >= 0:
                return RatInterval._out(self.lo ** k, self.hi ** k)
            if self.hi <= 0:
                return RatInterval._out(self.hi ** k, self.lo ** k)
            return RatInterval._out(Fraction(0), max(self.lo ** k, self.hi ** k))
        if isinstance(k, Fraction):
            return interval_pow(self, k)
        return NotImplemented

    def sqrt(self):
        if self.hi < 0:
            raise DomainError("sqrt of a negative interval")
        prec = _precision.get()
        lo = _sqrt_bounds(max(self.lo, Fraction(0)), prec)[0]
        hi = _sqrt_bounds(self.hi, prec)[1]
        return RatInterval._out(lo, hi)

    def log(self):
        return interval_log(self)

    def exp(self):
        return interval_exp(self)

    # -- conversions
    def __float__(self):
        return float(self.mid)

    def __eq__(self, other):
        if isinstance(other, RatInterval):
            return self.lo == other.lo and self.hi == other.hi
        return NotImplemented

    def __hash__(self):
        return hash((self.lo, self.hi))

    def decimal_bounds(self, digits: int = 25):
        """Endpoints as decimal strings, rounded outward."""
        return (_decimal_str(self.lo, digits, decimal.ROUND_FLOOR),
                _decimal_str(self.hi, digits, decimal.ROUND_CEILING))

    def __repr__(self):
        lo, hi = self.decimal_bounds(20)
        return f"RatInterval[{lo}, {hi}]"


def _decimal_str(x: Fraction, digits: int, rounding) -> str:
    ctx = decimal.Context(prec=digits, rounding=rounding)
    d = ctx.divide(decimal.Decimal(x.numerator), decimal.Decimal(x.denominator))
    return format(d, "f") if -30 < d.adjusted() < 30 else str(d)


def as_interval(x) -> RatInterval:
    o = _coerce(x)
    if o is None:
        raise TypeError(f"cannot enclose {type(x).__name__}")
    return o


def _sqrt_bounds(x: Fraction, prec: int):
    if x == 0:
        return Fraction(0), Fraction(0)
    r = rational_sqrt(x)
    if r is not None:
        return r, r
    n, d = x.numerator, x.denominator
    e = n.bit_length() - d.bit_length()
    k = prec + 4 - e // 2
    t = (n << (2 * k)) // d if k >= 0 else n // (d << (-2 * k))
    s = isqrt(t)
    scale = Fraction(1, 1 << k) if k >= 0 else Fraction(1 << (-k))
    return s * scale, (s + 1) * scale


# -- certified transcendental kernels (fixed point with W fractional bits)

def _atanh_fixed(a: int, b: int, W: int):
    """Bounds (lo, hi) on atanh(a/b)*2**W for 0 < a/b <= 1/3."""
    a2, b2 = a * a, b * b
    t = (a << W) // b
    s = 0
    k = 0
    while t:
        s += t // (2 * k + 1)
        t = t * a2 // b2
        k += 1
    return s, s + 3 * (k + 2)


@lru_cache(maxsize=32)
def _ln2_fixed(W: int):
    lo, hi = _atanh_fixed(1, 3, W)
    return 2 * lo, 2 * hi


def _log_bounds(x: Fraction, prec: int):
    if x <= 0:
        raise DomainError("log of a non-positive number")
    if x == 1:
        return Fraction(0), Fraction(0)
    W = prec + 24
    n, d = x.numerator, x.denominator
    k = n.bit_length() - d.bit_length()
    m = x / (Fraction(1 << k) if k >= 0 else Fraction(1, 1 << (-k)))
    if m > Fraction(4, 3):
        m /= 2
        k += 1
    elif m < Fraction(2, 3):
        m *= 2
        k -= 1
    z = (m - 1) / (m + 1)
    if z == 0:
        alo = ahi = 0
    elif z > 0:
        alo, ahi = _atanh_fixed(z.numerator, z.denominator, W)
    else:
        lo_, hi_ = _atanh_fixed(-z.numerator, z.denominator, W)
        alo, ahi = -hi_, -lo_
    l2lo, l2hi = _ln2_fixed(W)
    if k >= 0:
        klo, khi = k * l2lo, k * l2hi
    else:
        klo, khi = k * l2hi, k * l2lo
    scale = 1 << W
    return Fraction(klo + 2 * alo, scale), Fraction(khi + 2 * ahi, scale)


def _exp_bounds(r: Fraction, prec: int):
    if r == 0:
        return Fraction(1), Fraction(1)
    neg = r < 0
    r = -r if neg else r
    m = max(0, r.numerator.bit_length() - r.denominator.bit_length() + 1) + 8
    s = r / (1 << m)
    a, b = s.numerator, s.denominator
    W = prec + m + 24
    one = 1 << W
    t = one
    total = one
    j = 1
    while t:
        t = t * a // (b * j)
        total += t
        j += 1
    lo, hi = total, total + 2 * j + 4
    for _ in range(m):
        lo = (lo * lo) >> W
        hi = -((-(hi * hi)) >> W)
    if neg:
        return Fraction(one, hi), Fraction(one, lo)
    return Fraction(lo, one), Fraction(hi, one)


def interval_log(x) -> RatInterval:
    x = as_interval(x)
    if x.lo <= 0:
        raise DomainError("log of an interval with non-positive lower end")
    prec = _precision.get()
    lo = _log_bounds(x.lo, prec)[0]
    hi = _log_bounds(x.hi, prec)[1] if x.hi != x.lo else _log_bounds(x.lo, prec)[1]
    return RatInterval._out(lo, hi)


def interval_exp(x) -> RatInterval:
    x = as_interval(x)
    prec = _precision.get()
    lo = _exp_bounds(x.lo, prec)[0]
    hi = _exp_bounds(x.hi, prec)[1] if x.hi != x.lo else _exp_bounds(x.lo, prec)[1]
    return RatInterval._out(lo, hi)


def interval_pow(base, exponent, precision: int | None = None) -> RatInterval:
    """Enclosure of base**exponent for a positive base and rational exponent."""
    if precision is not None:
        with workprec(precision):
            return interval_pow(base, exponent)
    x = as_interval(base)
    e = to_rational(exponent)
    if x.lo <= 0:
        raise DomainError("interval_pow needs a positive base")
    if e == 0 or (x.lo == 1 and x.hi == 1):
        return RatInterval.point(1)
    if e.denominator == 1:
        return x ** int(e)
    if e.denominator == 2:
        return x.sqrt() ** e.numerator
    return interval_exp(interval_log(x) * e)


# ---------------------------------------------------------------------------
# polynomials


class UniPoly:
    """Univariate polynomial with rational coefficients (ascending order)."""

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs=(), var: str = "x"):
        c = [to_rational(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))
        object.__setattr__(self, "var", var)

    def __setattr__(self, name, value):
        raise AttributeError("UniPoly is immutable")

    @classmethod
    def from_desc(cls, coeffs, var="x"):
        """Coefficients from the highest power down, e.g. ["-1.7", "19.6", ...]."""
        return cls(list(reversed(list(coeffs))), var)

    @classmethod
    def gen(cls, var="x"):
        return cls((0, 1), var)

    @classmethod
    def const(cls, c, var="x"):
        return cls((c,), var)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __call__(self, x):
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def _other(self, o):
        if isinstance(o, UniPoly):
            return o
        if isinstance(o, (int, Fraction, str)):
            return UniPoly((o,), self.var)
        return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        n = max(len(self.coeffs), len(o.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = o.coeffs + (Fraction(0),) * (n - len(o.coeffs))
        return UniPoly([x + y for x, y in zip(a, b)], self.var)

    __radd__ = __add__

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs], self.var)

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if self.is_zero() or o.is_zero():
            return UniPoly((), self.var)
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(o.coeffs):
                    out[i + j] += x * y
        return UniPoly(out, self.var)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = UniPoly((1,), self.var)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def derivative(self):
        return UniPoly([i * c for i, c in enumerate(self.coeffs)][1:], self.var)

    def divmod(self, other: "UniPoly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        dq = len(r) - len(other.coeffs) + 1
        if dq <= 0:
            return UniPoly((), self.var), self
        q = [Fraction(0)] * dq
        lead = other.coeffs[-1]
        for k in range(dq - 1, -1, -1):
            c = r[k + len(other.coeffs) - 1] / lead
            q[k] = c
            if c:
                for j, y in enumerate(other.coeffs):
                    r[k + j] -= c * y
        return UniPoly(q, self.var), UniPoly(r, self.var)

    def monic(self):
        return UniPoly([c / self.leading for c in self.coeffs], self.var)

    def gcd(self, other: "UniPoly"):
        a, b = self, other
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        return a.monic() if not a.is_zero() else a

    def squarefree(self):
        g = self.gcd(self.derivative())
        if g.degree <= 0:
            return self
        return self.divmod(g)[0]

    def sturm_sequence(self):
        seq = [self, self.derivative()]
        while not seq[-1].is_zero():
            r = seq[-2].divmod(seq[-1])[1]
            if r.is_zero():
                break
            seq.append(-r)
        return [s for s in seq if not s.is_zero()]

    def cauchy_bound(self) -> Fraction:
        lead = abs(self.leading)
        return 1 + max((abs(c) / lead for c in self.coeffs[:-1]), default=Fraction(0))

    def __repr__(self):
        return f"UniPoly({self})"

    def __str__(self):
        if self.is_zero():
            return "0"
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mon = "" if i == 0 else (self.var if i == 1 else f"{self.var}^{i}")
            cs = str(c)
            if mon:
                cs = "" if c == 1 else ("-" if c == -1 else f"({cs})" if "/" in cs else cs)
                terms.append(f"{cs}{'*' if cs not in ('', '-') else ''}{mon}")
            else:
                terms.append(f"({cs})" if "/" in cs else cs)
        return " + ".join(terms).replace("+ -", "- ")


def _variations(seq, x):
    signs = []
    for s in seq:
        v = s.leading if x is None else s(x)
        if v:
            signs.append(v > 0)
    return sum(1 for u, w in zip(signs, signs[1:]) if u != w)


def count_roots(poly: UniPoly, lo, hi=None, _seq=None) -> int:
    """Number of distinct real roots in (lo, hi]; hi=None means +infinity.
    ``lo`` must not be a root."""
    seq = _seq or poly.squarefree().sturm_sequence()
    return _variations(seq, to_rational(lo)) - _variations(seq, None if hi is None else to_rational(hi))


@dataclass(frozen=True)
class PolyCertificate:
    verdict: str  # "positive" | "negative" | "has-root-at"
    poly: str
    lower: Fraction
    upper: Fraction | None
    root: tuple | None = None
    witness: Fraction | None = None

    @property
    def positive(self) -> bool:
        return self.verdict == "positive"

    def describe(self) -> str:
        rng = f"[{self.lower}, {'inf' if self.upper is None else self.upper}]"
        if self.verdict == "has-root-at":
            lo, hi = self.root
            where = str(lo) if lo == hi else f"({float(lo):.12g}, {float(hi):.12g}]"
            return f"{self.poly} has a root at {where} on {rng}"
        return f"{self.poly} is {self.verdict} on {rng}"


def poly_positive_on(poly: UniPoly, lower, upper=None) -> PolyCertificate:
    """Decide exactly whether ``poly`` > 0 on [lower, upper] (upper=None: +inf).

    Uses Sturm sequences on the square-free part; when a root exists the
    smallest one is isolated by bisection.  Never inconclusive.
    """
    if poly.is_zero():
        raise DomainError("zero polynomial")
    lower = to_rational(lower)
    upper = None if upper is None else to_rational(upper)
    if upper is not None and upper < lower:
        raise DomainError("empty range")
    name = str(poly)
    v0 = poly(lower)
    if v0 == 0:
        return PolyCertificate("has-root-at", name, lower, upper, (lower, lower), lower)
    sf = poly.squarefree()
    seq = sf.sturm_sequence()
    if count_roots(sf, lower, upper, seq) == 0:
        verdict = "positive" if v0 > 0 else "negative"
        return PolyCertificate(verdict, name, lower, upper, None, None if v0 > 0 else lower)
    lo = lower
    hi = upper if upper is not None else max(lower + 1, sf.cauchy_bound())
    tiny = Fraction(1, 1 << 64)
    while True:
        mid = (lo + hi) / 2
        left = count_roots(sf, lo, mid, seq)
        if left:
            if left == 1 and sf(mid) == 0:
                return PolyCertificate("has-root-at", name, lower, upper, (mid, mid), mid)
            hi = mid
        else:
            lo = mid
        if hi - lo < tiny and count_roots(sf, lo, hi, seq) == 1:
            if sf(hi) == 0:
                return PolyCertificate("has-root-at", name, lower, upper, (hi, hi), hi)
            return PolyCertificate("has-root-at", name, lower, upper, (lo, hi), None)
