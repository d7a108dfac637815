"""Differential polynomials in the generators u^(k)_{ab} and antiderivative symbols.

A DiffPoly is a finite sum of monomials with Gaussian rational coefficients.
Monomials are sorted tuples of generators (repeats encode powers).  The
derivation d_y raises the order of a U-generator by one; an A-generator is a
formal antiderivative whose derivative is looked up in the registry.
"""
from __future__ import annotations

import threading
from fractions import Fraction
from typing import Iterable, NamedTuple

from .qcore import GaussianRational, MixedRingError

_ZERO = Fraction(0)


class Generator(NamedTuple):
    family: str  # "A" or "U"
    alpha: int
    beta: int
    order: int = 0

    def raised(self) -> "Generator":
        return Generator(self.family, self.alpha, self.beta, self.order + 1)

    def lowered(self) -> "Generator":
        return Generator(self.family, self.alpha, self.beta, self.order - 1)

    def name(self) -> str:
        if self.family == "A":
            return f"A{self.alpha}"
        base = f"u{self.alpha}{self.beta}" if self.alpha < 10 else f"u{self.alpha}_{self.beta}"
        if self.order == 0:
            return base
        if self.order <= 3:
            return base + "_" + "y" * self.order
        return f"{base}_y{self.order}"


def u(alpha: int, beta: int, order: int = 0) -> Generator:
    return Generator("U", alpha, beta, order)


class _Registry:
    """Append-only table of antiderivative symbols and their derivatives."""

    def __init__(self):
        self._lock = threading.Lock()
        self._relations: dict[Generator, "DiffPoly"] = {}
        self._by_poly: dict[tuple, Generator] = {}

    def fresh(self, derivative: "DiffPoly") -> Generator:
        key = derivative._key()
        with self._lock:
            g = self._by_poly.get(key)
            if g is not None:
                return g
            g = Generator("A", len(self._relations) + 1, 1, 0)
            self._relations[g] = derivative
            self._by_poly[key] = g
            return g

    def derivative(self, g: Generator) -> "DiffPoly":
        return self._relations[g]

    def relations(self) -> dict[Generator, "DiffPoly"]:
        with self._lock:
            return dict(self._relations)

    def __len__(self):
        return len(self._relations)


REGISTRY = _Registry()


def _mono_mul(m1: tuple, m2: tuple) -> tuple:
    if not m1:
        return m2
    if not m2:
        return m1
    return tuple(sorted(m1 + m2))


def _cadd(c1, c2):
    return (c1[0] + c2[0], c1[1] + c2[1])


def _cmul(c1, c2):
    return (c1[0] * c2[0] - c1[1] * c2[1], c1[0] * c2[1] + c1[1] * c2[0])


def _to_c(x):
    if isinstance(x, GaussianRational):
        return (x.re, x.im)
    if isinstance(x, (int, Fraction)):
        return (Fraction(x), _ZERO)
    raise MixedRingError(f"cannot combine DiffPoly with {type(x).__name__}")


class DiffPoly:
    """Immutable element of the differential algebra with Q(i) coefficients."""

    __slots__ = ("_terms", "_hash")
    ring = "B"

    def __init__(self, terms: dict | None = None):
        t = {}
        if terms:
            for m, c in terms.items():
                if c[0] != 0 or c[1] != 0:
                    t[m] = c
        self._terms = t
        self._hash = None

    @classmethod
    def const(cls, c) -> "DiffPoly":
        return cls({(): _to_c(c)})

    @classmethod
    def gen(cls, g: Generator, coeff=1) -> "DiffPoly":
        return cls({(g,): _to_c(coeff)})

    @classmethod
    def from_terms(cls, items: Iterable) -> "DiffPoly":
        out: dict = {}
        for gens, c in items:
            m = tuple(sorted(gens))
            c = _to_c(c)
            out[m] = _cadd(out[m], c) if m in out else c
        return cls(out)

    def zero(self) -> "DiffPoly":
        return ZERO

    def is_zero(self) -> bool:
        return not self._terms

    def terms(self):
        """Iterate over (monomial, GaussianRational) in canonical order."""
        for m in sorted(self._terms):
            c = self._terms[m]
            yield m, GaussianRational(c[0], c[1])

    def raw_terms(self) -> dict:
        return self._terms

    def __len__(self):
        return len(self._terms)

    def generators(self) -> set:
        out = set()
        for m in self._terms:
            out.update(m)
        return out

    def has_family(self, family: str) -> bool:
        return any(g.family == family for m in self._terms for g in m)

    def constant_term(self) -> GaussianRational:
        c = self._terms.get((), (_ZERO, _ZERO))
        return GaussianRational(c[0], c[1])

    def _coerce(self, other) -> "DiffPoly":
        if isinstance(other, DiffPoly):
            return other
        return DiffPoly.const(other)

    def __add__(self, other):
        o = self._coerce(other)
        if not o._terms:
            return self
        if not self._terms:
            return o
        t = dict(self._terms)
        for m, c in o._terms.items():
            if m in t:
                s = _cadd(t[m], c)
                if s[0] == 0 and s[1] == 0:
                    del t[m]
                else:
                    t[m] = s
            else:
                t[m] = c
        return _make(t)

    __radd__ = __add__

    def __neg__(self):
        return _make({m: (-c[0], -c[1]) for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "DiffPoly":
        c = _to_c(c)
        if c[0] == 0 and c[1] == 0:
            return ZERO
        return _make({m: _cmul(v, c) for m, v in self._terms.items()})

    def __mul__(self, other):
        if not isinstance(other, DiffPoly):
            return self.scale(other)
        if not self._terms or not other._terms:
            return ZERO
        t: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                c = _cmul(c1, c2)
                if m in t:
                    t[m] = _cadd(t[m], c)
                else:
                    t[m] = c
        return DiffPoly(t)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, n: int):
        out = ONE
        for _ in range(n):
            out = out * self
        return out

    def conjugate(self) -> "DiffPoly":
        return _make({m: (c[0], -c[1]) for m, c in self._terms.items()})

    def real_part(self) -> "DiffPoly":
        return DiffPoly({m: (c[0], _ZERO) for m, c in self._terms.items()})

    def imag_part(self) -> "DiffPoly":
        return DiffPoly({m: (c[1], _ZERO) for m, c in self._terms.items()})

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            other = DiffPoly.const(other)
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self._terms == other._terms

    def _key(self) -> tuple:
        return tuple(sorted(self._terms.items()))

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        return f"DiffPoly({self})"

    def __str__(self):
        return render(self)

    def substitute(self, values: dict) -> "DiffPoly":
        """Replace generators by DiffPolys (or scalars); others are kept."""
        out = ZERO
        cache: dict = {}
        for m, c in self._terms.items():
            term = DiffPoly({(): c})
            rest = []
            for g in m:
                if g in values:
                    v = values[g]
                    if not isinstance(v, DiffPoly):
                        v = DiffPoly.const(v)
                    term = term * v
                else:
                    rest.append(g)
            if rest:
                term = term * DiffPoly({tuple(rest): (Fraction(1), _ZERO)})
            out = out + term
        del cache
        return out

    def evaluate(self, values: dict):
        """Numeric evaluation; every generator must be present in values."""
        total = 0j
        for m, c in self._terms.items():
            v = complex(float(c[0]), float(c[1]))
            for g in m:
                v *= values[g]
            total += v
        return total


def _make(t: dict) -> DiffPoly:
    p = DiffPoly.__new__(DiffPoly)
    p._terms = t
    p._hash = None
    return p


ZERO = _make({})
ONE = DiffPoly.const(1)


def _d_mono(m: tuple) -> DiffPoly:
    out: dict = {}
    n = len(m)
    i = 0
    while i < n:
        g = m[i]
        j = i
        while j < n and m[j] == g:
            j += 1
        mult = j - i
        rest = m[:i] + m[i + 1:]
        if g.family == "U":
            mono = tuple(sorted(rest + (g.raised(),)))
            c = (Fraction(mult), _ZERO)
            out[mono] = _cadd(out[mono], c) if mono in out else c
        else:
            rel = REGISTRY.derivative(g)
            for rm, rc in rel.raw_terms().items():
                mono = _mono_mul(rest, rm)
                c = (rc[0] * mult, rc[1] * mult)
                out[mono] = _cadd(out[mono], c) if mono in out else c
        i = j
    return DiffPoly(out)


_D_CACHE: dict = {}


def d_y(p: DiffPoly, times: int = 1) -> DiffPoly:
    for _ in range(times):
        out: dict = {}
        for m, c in p.raw_terms().items():
            dm = _D_CACHE.get(m)
            if dm is None:
                dm = _d_mono(m)
                _D_CACHE[m] = dm
            for mm, cc in dm.raw_terms().items():
                v = _cmul(cc, c)
                out[mm] = _cadd(out[mm], v) if mm in out else v
        p = DiffPoly(out)
    return p


def _mono_key(m: tuple) -> tuple:
    # Highest derivative order dominates; used to choose elimination pivots.
    return tuple(sorted(((g.order, g.family == "U", g.alpha, g.beta) for g in m), reverse=True))


def _divide(m: tuple, sub: tuple):
    rest = list(m)
    for g in sub:
        try:
            rest.remove(g)
        except ValueError:
            return None
    return tuple(rest)


def _candidates(monos: Iterable[tuple], relations: dict) -> set:
    out = set()
    for m in monos:
        seen = set()
        for idx, g in enumerate(m):
            if g in seen:
                continue
            seen.add(g)
            if g.family == "U" and g.order > 0:
                out.add(tuple(sorted(m[:idx] + m[idx + 1:] + (g.lowered(),))))
        for a, rel in relations.items():
            for rm in rel.raw_terms():
                rest = _divide(m, rm)
                if rest is not None:
                    out.add(tuple(sorted(rest + (a,))))
    return out


class _Echelon:
    """Semi-echelon basis of derivatives of candidate monomials over Q."""

    def __init__(self):
        self.rows: list[tuple[tuple, dict, dict]] = []  # (pivot, vector, preimage)
        self.pivots: set = set()

    def add(self, mono: tuple) -> None:
        vec = {m: c[0] for m, c in _D_CACHE_get(mono).raw_terms().items()}
        pre = {mono: Fraction(1)}
        vec, pre = self.reduce(vec, pre)
        if not vec:
            return
        piv = max(vec, key=_mono_key)
        inv = 1 / vec[piv]
        vec = {m: c * inv for m, c in vec.items()}
        pre = {m: c * inv for m, c in pre.items()}
        self.rows.append((piv, vec, pre))
        self.pivots.add(piv)

    def reduce(self, vec: dict, pre: dict | None = None):
        vec = dict(vec)
        pre = dict(pre) if pre is not None else {}
        for piv, row, rpre in self.rows:
            c = vec.get(piv)
            if not c:
                continue
            for m, v in row.items():
                nv = vec.get(m, _ZERO) - c * v
                if nv:
                    vec[m] = nv
                else:
                    vec.pop(m, None)
            for m, v in rpre.items():
                nv = pre.get(m, _ZERO) - c * v
                if nv:
                    pre[m] = nv
                else:
                    pre.pop(m, None)
        return vec, pre


def _D_CACHE_get(m: tuple) -> DiffPoly:
    dm = _D_CACHE.get(m)
    if dm is None:
        dm = _d_mono(m)
        _D_CACHE[m] = dm
    return dm


def _real_antiderivative(vec: dict):
    """Return (preimage, remainder) with d_y(preimage) + remainder = vec (rational)."""
    relations = REGISTRY.relations()
    candidates: set = set()
    frontier = set(vec)
    seen_monos = set(frontier)
    while frontier:
        new = _candidates(frontier, relations) - candidates
        candidates |= new
        frontier = set()
        for q in new:
            for m in _D_CACHE_get(q).raw_terms():
                if m not in seen_monos:
                    seen_monos.add(m)
                    frontier.add(m)
    ech = _Echelon()
    for q in sorted(candidates, key=_mono_key):
        ech.add(q)
    rem, pre = ech.reduce(vec)
    # pre holds -coefficients of the subtraction; flip sign to get the preimage
    pre = {m: -c for m, c in pre.items()}
    return pre, rem


_INT_CACHE: dict = {}


def formal_integrate(p: DiffPoly) -> DiffPoly:
    """Antiderivative of p with zero integration constant.

    Exact antiderivatives are found by linear algebra over candidate
    monomials; each leftover normal-form monomial receives a fresh A symbol.
    """
    cached = _INT_CACHE.get(p)
    if cached is not None:
        return cached
    if p.constant_term() != 0:
        raise ValueError("constants have no polynomial antiderivative in B")
    out = ZERO
    for part, unit in ((p.real_part(), (Fraction(1), _ZERO)), (p.imag_part(), (_ZERO, Fraction(1)))):
        vec = {m: c[0] for m, c in part.raw_terms().items()}
        if not vec:
            continue
        pre, rem = _real_antiderivative(vec)
        q = DiffPoly({m: (c, _ZERO) for m, c in pre.items()})
        for m in sorted(rem, key=_mono_key):
            a = REGISTRY.fresh(DiffPoly({m: (Fraction(1), _ZERO)}))
            q = q + DiffPoly({(a,): (rem[m], _ZERO)})
        out = out + DiffPoly({m: _cmul(c, unit) for m, c in q.raw_terms().items()})
    _INT_CACHE[p] = out
    return out


def render(p: DiffPoly) -> str:
    """Deterministic text: terms in canonical monomial order joined by ' + '."""
    if p.is_zero():
        return "0"
    parts = []
    for m, c in p.terms():
        names = []
        i = 0
        while i < len(m):
            j = i
            while j < len(m) and m[j] == m[i]:
                j += 1
            n = m[i].name()
            names.append(n if j - i == 1 else f"{n}^{j - i}")
            i = j
        mono = "*".join(names)
        if not mono:
            parts.append(f"({c})" if c.re != 0 and c.im != 0 else str(c))
        elif c == 1:
            parts.append(mono)
        elif c == -1:
            parts.append("-" + mono)
        elif c.im == 0 or c.re == 0:
            parts.append(f"{c}*{mono}")
        else:
            parts.append(f"({c})*{mono}")
    return " + ".join(parts).replace("+ -", "- ")
