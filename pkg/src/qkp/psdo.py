"""Truncated pseudo-differential operators in d/dy with quaternionic DiffPoly coefficients.

An operator is sum_e c_e * D^e with c_e = a_e + j b_e.  Coefficients below
``lo_valid`` are unknown; ``lo_valid=None`` marks an operator that is known
exactly (a finite sum).  Composition uses

    D^n c = sum_m binom(n, m) c^(m) D^(n-m),

valid for negative n as a formal series.
"""
from __future__ import annotations

from fractions import Fraction

from .diffalg import ONE, ZERO, DiffPoly, d_y
from .qcore import GaussianRational, Quaternion

DEFAULT_LO = -8


class WindowError(ValueError):
    """A coefficient outside the declared validity window was requested."""


def binom(n: int, m: int) -> Fraction:
    """Generalised binomial coefficient n(n-1)...(n-m+1)/m! for integer n."""
    out = Fraction(1)
    for k in range(m):
        out = out * (n - k) / (k + 1)
    return out


def _qmul(p, q):
    a1, b1 = p
    a2, b2 = q
    return (a1 * a2 - b1.conjugate() * b2, a1.conjugate() * b2 + b1 * a2)


def _dq(p, times=1):
    return (d_y(p[0], times), d_y(p[1], times))


def _qzero(p) -> bool:
    return p[0].is_zero() and p[1].is_zero()


def _as_pair(c):
    if isinstance(c, Quaternion):
        a, b = c.a, c.b
    else:
        a, b = c, ZERO
    if not isinstance(a, DiffPoly):
        a = DiffPoly.const(a)
    if not isinstance(b, DiffPoly):
        b = DiffPoly.const(b)
    return (a, b)


def _max_lo(*los):
    known = [x for x in los if x is not None]
    return max(known) if known else None


class PsdOp:
    """Immutable truncated pseudo-differential operator."""

    __slots__ = ("_c", "hi", "lo_valid")

    def __init__(self, coeffs: dict | None = None, lo_valid: int | None = None, hi: int | None = None):
        c = {}
        for e, q in (coeffs or {}).items():
            pair = _as_pair(q)
            if _qzero(pair):
                continue
            if lo_valid is not None and e < lo_valid:
                continue
            c[int(e)] = pair
        self._c = c
        top = max(c) if c else None
        if hi is None:
            hi = top if top is not None else 0
        elif top is not None and top > hi:
            raise ValueError("stored exponent exceeds hi")
        self.hi = hi
        self.lo_valid = lo_valid

    @classmethod
    def _raw(cls, c: dict, lo_valid, hi) -> "PsdOp":
        op = cls.__new__(cls)
        op._c = {e: q for e, q in c.items() if not _qzero(q) and (lo_valid is None or e >= lo_valid)}
        op.hi = hi
        op.lo_valid = lo_valid
        return op

    @classmethod
    def d(cls, n: int = 1, coeff=1) -> "PsdOp":
        """The exact monomial coeff * D^n."""
        return cls({n: coeff})

    @classmethod
    def scalar(cls, coeff) -> "PsdOp":
        return cls({0: coeff})

    def exponents(self) -> list[int]:
        return sorted(self._c, reverse=True)

    def coeff(self, e: int) -> Quaternion:
        if self.lo_valid is not None and e < self.lo_valid:
            raise WindowError(f"exponent {e} below validity window {self.lo_valid}")
        a, b = self._c.get(e, (ZERO, ZERO))
        return Quaternion(a, b)

    def items(self):
        for e in self.exponents():
            a, b = self._c[e]
            yield e, Quaternion(a, b)

    def is_zero(self) -> bool:
        return not self._c

    def with_lo(self, lo: int) -> "PsdOp":
        """Discard information below lo (never extends the window)."""
        new_lo = lo if self.lo_valid is None else max(lo, self.lo_valid)
        return PsdOp._raw(self._c, new_lo, self.hi)

    def __add__(self, other: "PsdOp") -> "PsdOp":
        lo = _max_lo(self.lo_valid, other.lo_valid)
        c = dict(self._c)
        for e, q in other._c.items():
            if e in c:
                p = c[e]
                c[e] = (p[0] + q[0], p[1] + q[1])
            else:
                c[e] = q
        return PsdOp._raw(c, lo, max(self.hi, other.hi))

    def __neg__(self) -> "PsdOp":
        return PsdOp._raw({e: (-q[0], -q[1]) for e, q in self._c.items()}, self.lo_valid, self.hi)

    def __sub__(self, other: "PsdOp") -> "PsdOp":
        return self + (-other)

    def left_mul(self, q) -> "PsdOp":
        """Multiply every coefficient on the left by a constant quaternion."""
        p = _as_pair(q)
        return PsdOp._raw({e: _qmul(p, c) for e, c in self._c.items()}, self.lo_valid, self.hi)

    def right_mul(self, q) -> "PsdOp":
        """Multiply on the right by a constant (y-independent) quaternion."""
        p = _as_pair(q)
        return PsdOp._raw({e: _qmul(c, p) for e, c in self._c.items()}, self.lo_valid, self.hi)

    def __eq__(self, other):
        if not isinstance(other, PsdOp):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash(tuple(sorted((e, q[0], q[1]) for e, q in self._c.items())))

    def map_coeffs(self, fn) -> "PsdOp":
        return PsdOp._raw({e: fn(q) for e, q in self._c.items()}, self.lo_valid, self.hi)

    def __repr__(self):
        return f"PsdOp(hi={self.hi}, lo_valid={self.lo_valid}, {serialize(self)})"


def compose(A: PsdOp, B: PsdOp, lo: int | None = None) -> PsdOp:
    """Product A*B, exact at every exponent >= the returned lo_valid."""
    bounds = []
    if A.lo_valid is not None:
        bounds.append(A.lo_valid + B.hi)
    if B.lo_valid is not None:
        bounds.append(B.lo_valid + A.hi)
    if lo is not None:
        bounds.append(lo)
    res_lo = max(bounds) if bounds else None
    infinite = any(e < 0 for e in A._c) and any(not _is_constant(q) for q in B._c.values())
    if res_lo is None and infinite:
        res_lo = DEFAULT_LO
    out: dict = {}
    dcache: dict = {}
    for ea, qa in A._c.items():
        for eb, qb in B._c.items():
            m = 0
            while True:
                e = ea + eb - m
                if res_lo is not None and e < res_lo:
                    break
                if ea >= 0 and m > ea:
                    break
                bc = binom(ea, m)
                if m == 0:
                    der = qb
                else:
                    key = (eb, m)
                    der = dcache.get(key)
                    if der is None:
                        prev = qb if m == 1 else dcache[(eb, m - 1)]
                        der = _dq(prev)
                        dcache[key] = der
                    if _qzero(der):
                        break
                prod = _qmul(qa, der)
                if bc != 1:
                    prod = (prod[0].scale(bc), prod[1].scale(bc))
                if e in out:
                    cur = out[e]
                    out[e] = (cur[0] + prod[0], cur[1] + prod[1])
                else:
                    out[e] = prod
                m += 1
    return PsdOp._raw(out, res_lo, A.hi + B.hi)


def _is_constant(q) -> bool:
    return all(not m for m in q[0].raw_terms()) and all(not m for m in q[1].raw_terms())


def plus_part(A: PsdOp) -> PsdOp:
    if A.lo_valid is not None and A.lo_valid > 0:
        raise WindowError("plus part requested outside the validity window")
    return PsdOp._raw({e: q for e, q in A._c.items() if e >= 0}, None, max(A.hi, 0))


def minus_part(A: PsdOp) -> PsdOp:
    return PsdOp._raw({e: q for e, q in A._c.items() if e < 0}, A.lo_valid, min(A.hi, -1))


def commutator(A: PsdOp, B: PsdOp, lo: int | None = None) -> PsdOp:
    return compose(A, B, lo) - compose(B, A, lo)


def derive_coeffs(A: PsdOp, derivation) -> PsdOp:
    """Apply a map on DiffPoly to every coefficient component."""
    return A.map_coeffs(lambda q: (derivation(q[0]), derivation(q[1])))


def conjugate_by_phase(A: PsdOp, phase: GaussianRational) -> PsdOp:
    """e^{-i t0} A e^{i t0} for the unimodular phase w = e^{i t0}.

    The i-commuting part of each coefficient is unchanged and the
    anticommuting part j*b becomes j*(w^2 b).
    """
    w = GaussianRational.coerce(phase)
    if w.norm() != 1:
        raise ValueError("phase must be unimodular")
    w2 = w * w
    return A.map_coeffs(lambda q: (q[0], q[1].scale(w2)))


def _qtext(q) -> str:
    a, b = q
    parts = []
    if not a.is_zero():
        parts.append(f"({a})")
    if not b.is_zero():
        parts.append(f"j({b})")
    return " + ".join(parts)


def serialize(A: PsdOp) -> str:
    """Exponent-descending text such as '[1] (i) ; [0] j(u03 + i*u04)'."""
    if A.is_zero():
        return "0"
    return " ; ".join(f"[{e}] {_qtext(A._c[e])}" for e in A.exponents())


I_POLY = DiffPoly.const(GaussianRational(0, 1))
ONE_POLY = ONE
