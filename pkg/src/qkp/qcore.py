"""Exact scalar rings and quaternions in the a + jb form.

A quaternion is stored as a pair (a, b) of complex-like scalars meaning
a + j*b, with the commutation rule j*c = conj(c)*j.  Hence

    (a + jb)(c + jd) = (ac - conj(b) d) + j(conj(a) d + b c).

Components may be Fractions, GaussianRationals, Python complex numbers or
any object exposing ``conjugate()`` and ring arithmetic (DiffPoly does).
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational

import numpy as np


class MixedRingError(TypeError):
    """Raised when exact and floating point scalars meet in one operation."""


def _as_fraction(x):
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    raise MixedRingError(f"cannot combine exact scalar with {type(x).__name__}")


class GaussianRational:
    """Exact element re + i*im of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _as_fraction(re)
        self.im = _as_fraction(im)

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x, 0)
        raise MixedRingError(f"cannot combine Gaussian rational with {type(x).__name__}")

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __add__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except MixedRingError:
            return NotImplemented if _foreign(other) else _raise(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except MixedRingError:
            return NotImplemented if _foreign(other) else _raise(other)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except MixedRingError:
            return NotImplemented if _foreign(other) else _raise(other)
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def inverse(self) -> "GaussianRational":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero Gaussian rational")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except MixedRingError:
            return NotImplemented if _foreign(other) else _raise(other)
        return self * o.inverse()

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = GaussianRational(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            o = GaussianRational.coerce(other)
            return self.re == o.re and self.im == o.im
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return not self.is_zero()

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        return format_gaussian(self)


def _foreign(x) -> bool:
    # Types that define their own reflected operation (e.g. DiffPoly).
    return hasattr(x, "__radd__") and not isinstance(x, (int, float, complex, Fraction))


def _raise(x):
    raise MixedRingError(f"cannot combine exact scalar with {type(x).__name__}")


def _fmt_fraction(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def format_gaussian(g) -> str:
    """Canonical text for an exact scalar: '3', '-1/2', 'i', '1/2-3i'."""
    g = GaussianRational.coerce(g)
    if g.im == 0:
        return _fmt_fraction(g.re)
    im = g.im
    if im == 1:
        ims = "i"
    elif im == -1:
        ims = "-i"
    else:
        ims = _fmt_fraction(im) + "i"
    if g.re == 0:
        return ims
    sign = "" if ims.startswith("-") else "+"
    return f"{_fmt_fraction(g.re)}{sign}{ims}"


I_EXACT = GaussianRational(0, 1)


def ring_of(x) -> str:
    """Name of the scalar ring a component belongs to."""
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, (int, Fraction)) or isinstance(x, Rational):
        return "Q"
    if isinstance(x, GaussianRational):
        return "Q(i)"
    if isinstance(x, (float, complex, np.floating, np.complexfloating)):
        return "C"
    ring = getattr(x, "ring", None)
    if ring is not None:
        return ring
    raise TypeError(f"unsupported scalar {type(x).__name__}")


_EXACT = {"Q", "Q(i)", "B"}


def check_rings(*values) -> None:
    rings = {ring_of(v) for v in values}
    if rings & _EXACT and "C" in rings:
        raise MixedRingError(f"mixed scalar rings: {sorted(rings)}")


def sconj(x):
    """Complex conjugate of a scalar component."""
    if isinstance(x, (int, Fraction)):
        return x
    return x.conjugate()


def _is_zero(x) -> bool:
    if isinstance(x, (int, Fraction, float, complex)):
        return x == 0
    z = getattr(x, "is_zero", None)
    if z is not None:
        return z()
    return x == 0


class Quaternion:
    """Immutable quaternion a + j*b with complex-like components."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        check_rings(a, b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def __setattr__(self, name, value):
        raise AttributeError("Quaternion is immutable")

    @property
    def ring(self) -> str:
        ra, rb = ring_of(self.a), ring_of(self.b)
        if "C" in (ra, rb):
            return "C"
        if "B" in (ra, rb):
            return "B"
        if "Q(i)" in (ra, rb):
            return "Q(i)"
        return "Q"

    def __add__(self, other):
        o = _qcoerce(other)
        check_rings(self.a, o.a)
        return Quaternion(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return Quaternion(-self.a, -self.b)

    def __sub__(self, other):
        o = _qcoerce(other)
        check_rings(self.a, o.a)
        return Quaternion(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return _qcoerce(other) - self

    def __mul__(self, other):
        return qmul(self, _qcoerce(other))

    def __rmul__(self, other):
        return qmul(_qcoerce(other), self)

    def conj(self) -> "Quaternion":
        return Quaternion(sconj(self.a), -self.b)

    def norm2(self):
        return self.a * sconj(self.a) + self.b * sconj(self.b)

    def is_zero(self) -> bool:
        return _is_zero(self.a) and _is_zero(self.b)

    def __eq__(self, other):
        try:
            o = _qcoerce(other)
        except TypeError:
            return NotImplemented
        return _is_zero(self.a - o.a) and _is_zero(self.b - o.b)

    def __hash__(self):
        return hash((self.a, self.b))

    def __repr__(self):
        return f"Quaternion({self.a!r}, {self.b!r})"

    def components(self):
        """Real coordinates (1, i, j, k) with k = i*j, valid for numeric rings."""
        a, b = complex(self.a), complex(self.b)
        # j*b = j*(br + i*bi) = br*j - bi*k  since j*i = -k
        return (a.real, a.imag, b.real, -b.imag)


def _qcoerce(x) -> Quaternion:
    if isinstance(x, Quaternion):
        return x
    return Quaternion(x, _zero_like(x))


def _zero_like(x):
    if isinstance(x, (int, Fraction)):
        return 0
    if isinstance(x, GaussianRational):
        return GaussianRational(0)
    if isinstance(x, (float, complex)):
        return 0j
    z = getattr(x, "zero", None)
    if z is not None:
        return z()
    return 0 * x


def qmul(p: Quaternion, q: Quaternion) -> Quaternion:
    check_rings(p.a, p.b, q.a, q.b)
    a = p.a * q.a - sconj(p.b) * q.b
    b = sconj(p.a) * q.b + p.b * q.a
    return Quaternion(a, b)


def qinv(q: Quaternion) -> Quaternion:
    n = q.norm2()
    if _is_zero(n):
        raise ZeroDivisionError("inverse of zero quaternion")
    if isinstance(n, GaussianRational):
        n = n.re
    if isinstance(n, complex):
        n = n.real
    c = q.conj()
    return Quaternion(c.a / n, c.b / n)


def isplit(q: Quaternion) -> tuple[Quaternion, Quaternion]:
    """Split q into its i-commuting part (a, 0) and i-anticommuting part (0, b)."""
    return Quaternion(q.a, _zero_like(q.b)), Quaternion(_zero_like(q.a), q.b)


def exact_unit(kind: str) -> Quaternion:
    """Exact basis quaternions '1', 'i', 'j', 'k' over Q(i)."""
    one, zero, i = GaussianRational(1), GaussianRational(0), GaussianRational(0, 1)
    table = {
        "1": Quaternion(one, zero),
        "i": Quaternion(i, zero),
        "j": Quaternion(zero, one),
        "k": Quaternion(zero, -i),
    }
    return table[kind]


# Vectorised numeric helpers.  Quaternion fields are carried as pairs of
# complex numpy arrays (a, b) meaning a + j b.

def qmul_arrays(a1, b1, a2, b2):
    return a1 * a2 - np.conj(b1) * b2, np.conj(a1) * b2 + b1 * a2


def qinv_arrays(a, b):
    n = np.abs(a) ** 2 + np.abs(b) ** 2
    return np.conj(a) / n, -b / n


def qnorm_arrays(a, b):
    return np.sqrt(np.abs(a) ** 2 + np.abs(b) ** 2)


def real_matrix(q: Quaternion) -> np.ndarray:
    """4x4 real matrix of left multiplication in the basis (1, i, j, k)."""
    w, x, y, z = q.components()
    return np.array([
        [w, -x, -y, -z],
        [x, w, -z, y],
        [y, z, w, -x],
        [z, -y, x, w],
    ])
