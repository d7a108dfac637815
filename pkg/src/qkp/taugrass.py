"""Finite-rank Grassmannian model: Plücker coordinates, tau functions and the quaternionic constraint.

A pair (u, v) of Laurent series stands for the quaternion-valued series
u + j conj(v) and is interleaved into one scalar series u(zeta^2) + zeta v(zeta^2),
so component mode m of u sits at index 2m and of v at index 2m + 1.
Left multiplication by j becomes the antilinear map J(u, v) = (-conj v, conj u),
with conjugation acting on coefficients.

A frame with component window [-M, M'] describes
W = span(columns) + (all modes above M' in both components);
the columns live on the interleaved indices -2M .. 2M'+1 and there are
2(M'+1) of them, so W has virtual dimension zero.

Times t = (t_1, t_2, ...) act by multiplication with exp(sum t_k zeta^k)
(the inverse of the group element in the usual tau formula), so that the
one-box tau function is t_1.  Everything is exact over Q(i).
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

from .nodal import ConditionSystem, solve_baker
from .qcore import GaussianRational, format_gaussian

G0 = GaussianRational(0)
G1 = GaussianRational(1)


class WindowError(ValueError):
    """An index set or frame reaches outside the finite window."""


def _g(x) -> GaussianRational:
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, complex):
        return GaussianRational(Fraction(x.real), Fraction(x.imag))
    return GaussianRational.coerce(x)


# exact linear algebra over Q(i)

def det_exact(rows: list[list[GaussianRational]]) -> GaussianRational:
    n = len(rows)
    if n == 0:
        return G1
    A = [list(r) for r in rows]
    sign = 1
    out = G1
    for c in range(n):
        p = next((r for r in range(c, n) if not A[r][c].is_zero()), None)
        if p is None:
            return G0
        if p != c:
            A[c], A[p] = A[p], A[c]
            sign = -sign
        piv = A[c][c]
        out = out * piv
        inv = piv.inverse()
        for r in range(c + 1, n):
            if A[r][c].is_zero():
                continue
            f = A[r][c] * inv
            A[r] = [A[r][k] - f * A[c][k] if k >= c else A[r][k] for k in range(n)]
    return out if sign > 0 else -out


def rank_exact(rows: list[list[GaussianRational]]) -> int:
    A = [list(r) for r in rows]
    if not A:
        return 0
    m, n = len(A), len(A[0])
    rank = 0
    for c in range(n):
        p = next((r for r in range(rank, m) if not A[r][c].is_zero()), None)
        if p is None:
            continue
        A[rank], A[p] = A[p], A[rank]
        inv = A[rank][c].inverse()
        for r in range(m):
            if r != rank and not A[r][c].is_zero():
                f = A[r][c] * inv
                A[r] = [A[r][k] - f * A[rank][k] for k in range(n)]
        rank += 1
        if rank == m:
            break
    return rank


def parity(seq) -> int:
    """0 for an even permutation of sorted(seq), 1 for odd."""
    seq = list(seq)
    inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return inv % 2


# index sets

@dataclass(frozen=True)
class IndexSet:
    """S = (N minus ``removed``) union ``added``, with added < 0 <= removed."""

    added: frozenset = frozenset()
    removed: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "added", frozenset(self.added))
        object.__setattr__(self, "removed", frozenset(self.removed))
        if any(a >= 0 for a in self.added) or any(r < 0 for r in self.removed):
            raise ValueError("added indices must be negative and removed ones non-negative")

    @classmethod
    def vacuum(cls) -> "IndexSet":
        return cls()

    @classmethod
    def from_elements(cls, elements, top: int) -> "IndexSet":
        """S whose members below ``top`` are ``elements`` and which contains every index >= top."""
        el = set(elements)
        if any(e >= top for e in el):
            raise ValueError("elements must lie below top")
        added = {e for e in el if e < 0}
        removed = {i for i in range(0, top) if i not in el}
        return cls(frozenset(added), frozenset(removed))

    def __contains__(self, i: int) -> bool:
        return i in self.added if i < 0 else i not in self.removed

    @property
    def virtual_cardinal(self) -> int:
        return len(self.added) - len(self.removed)

    def elements_below(self, top: int) -> list[int]:
        lo = min(self.added, default=0)
        return [i for i in range(lo, top) if i in self]

    @property
    def weight(self) -> int:
        """|lambda| of the partition attached to S (virtual cardinal zero)."""
        if self.virtual_cardinal != 0:
            raise ValueError("weight needs virtual cardinal zero")
        top = max(self.removed, default=-1) + 1
        el = self.elements_below(top)
        return sum(i - s for i, s in enumerate(el))

    def span(self) -> tuple[int, int]:
        lo = min(self.added, default=0)
        hi = max(self.removed, default=-1)
        return lo, hi

    def to_json(self) -> dict:
        return {"added": sorted(self.added), "removed": sorted(self.removed)}

    def __repr__(self):
        return f"IndexSet(added={sorted(self.added)}, removed={sorted(self.removed)})"


def split_S(S: IndexSet) -> tuple[IndexSet, IndexSet]:
    """S0 = {j : 2j in S}, S1 = {j : 2j+1 in S}."""
    a0 = {i // 2 for i in S.added if i % 2 == 0}
    a1 = {(i - 1) // 2 for i in S.added if i % 2 == 1}
    r0 = {i // 2 for i in S.removed if i % 2 == 0}
    r1 = {(i - 1) // 2 for i in S.removed if i % 2 == 1}
    return IndexSet(frozenset(a0), frozenset(r0)), IndexSet(frozenset(a1), frozenset(r1))


def join_S(S0: IndexSet, S1: IndexSet) -> IndexSet:
    """Inverse of split_S: H_S = iota(H_S0 + H_S1)."""
    added = {2 * i for i in S0.added} | {2 * i + 1 for i in S1.added}
    removed = {2 * i for i in S0.removed} | {2 * i + 1 for i in S1.removed}
    return IndexSet(frozenset(added), frozenset(removed))


def interleave(u: dict, v: dict) -> dict:
    """u(zeta^2) + zeta v(zeta^2) on coefficient dictionaries {mode: coeff}."""
    out = {}
    for m, c in u.items():
        out[2 * m] = c
    for m, c in v.items():
        out[2 * m + 1] = c
    return {k: c for k, c in out.items() if c != 0}


def deinterleave(w: dict) -> tuple[dict, dict]:
    u = {k // 2: c for k, c in w.items() if k % 2 == 0}
    v = {(k - 1) // 2: c for k, c in w.items() if k % 2 == 1}
    return u, v


# exponentials

def exp_coefficients(t, n: int) -> list[GaussianRational]:
    """Coefficients h_0..h_n of exp(sum_k t_k zeta^k) (t indexed from t_1)."""
    t = [_g(x) for x in t]
    h = [G1]
    for k in range(1, n + 1):
        s = G0
        for j in range(1, min(k, len(t)) + 1):
            if not t[j - 1].is_zero():
                s = s + t[j - 1] * h[k - j] * j
        h.append(s * Fraction(1, k))
    return h


# frames

@dataclass(frozen=True)
class FiniteRankFrame:
    """W = span(columns) + modes above ``top`` in both components.

    ``columns`` are dictionaries {interleaved index: GaussianRational} with
    indices in [lo, hi] where lo = -2M and hi = 2M'+1.
    """

    M: int
    Mp: int
    columns: tuple
    quaternionic: bool = False

    def __post_init__(self):
        if self.M < 0 or self.Mp < -1:
            raise WindowError("invalid window")
        cols = tuple({int(k): _g(v) for k, v in c.items() if not _g(v).is_zero()} for c in self.columns)
        for c in cols:
            if any(k < self.lo or k > self.hi for k in c):
                raise WindowError("column entry outside the window")
        object.__setattr__(self, "columns", cols)
        if len(cols) != self.rank_expected:
            raise WindowError(f"need {self.rank_expected} columns for virtual dimension zero, got {len(cols)}")
        if rank_exact(self.matrix()) != len(cols):
            raise ValueError("columns are linearly dependent")
        if self.quaternionic and not is_j_invariant(self):
            raise ValueError("frame flagged quaternionic but j W != W")

    @property
    def lo(self) -> int:
        return -2 * self.M

    @property
    def hi(self) -> int:
        return 2 * self.Mp + 1

    @property
    def top(self) -> int:
        return self.hi + 1

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    @property
    def rank_expected(self) -> int:
        return 2 * (self.Mp + 1)

    def matrix(self) -> list[list[GaussianRational]]:
        """Row-major window matrix, rows ordered by index lo..hi."""
        return [[c.get(i, G0) for c in self.columns] for i in range(self.lo, self.hi + 1)]

    def enlarge(self, M: int, Mp: int) -> "FiniteRankFrame":
        """The same W described in a larger window."""
        if M < self.M or Mp < self.Mp:
            raise WindowError("can only enlarge")
        cols = list(self.columns)
        for i in range(self.top, 2 * Mp + 2):
            cols.append({i: G1})
        return FiniteRankFrame(M, Mp, tuple(cols), self.quaternionic)


def J_column(col: dict) -> dict:
    """Left multiplication by j in interleaved coordinates: (u, v) -> (-conj v, conj u)."""
    out = {}
    for k, c in col.items():
        if k % 2 == 0:
            out[k + 1] = c.conjugate()
        else:
            out[k - 1] = -c.conjugate()
    return out


def is_j_invariant(frame: FiniteRankFrame) -> bool:
    base = frame.matrix()
    r = len(frame.columns)
    for c in frame.columns:
        jc = J_column(c)
        aug = [row + [jc.get(i, G0)] for row, i in zip(base, range(frame.lo, frame.hi + 1))]
        if rank_exact(aug) != r:
            return False
    return True


def basis_frame(S: IndexSet, M: int, Mp: int) -> FiniteRankFrame:
    """W = H_S in the given window."""
    top = 2 * Mp + 2
    lo_s, hi_s = S.span()
    if lo_s < -2 * M or hi_s >= top:
        raise WindowError("index set does not fit the window")
    if S.virtual_cardinal != 0:
        raise WindowError("window model needs virtual cardinal zero")
    cols = tuple({i: G1} for i in S.elements_below(top))
    return FiniteRankFrame(M, Mp, cols)


def _rand_g(rng: random.Random, bound: int) -> GaussianRational:
    return GaussianRational(rng.randint(-bound, bound), rng.randint(-bound, bound))


def random_quaternionic_frame(M: int, Mp: int, seed: int = 0, bound: int = 3) -> FiniteRankFrame:
    """Columns g_k and J g_k for M'+1 random Gaussian-integer vectors g_k."""
    rng = random.Random(seed)
    lo, hi = -2 * M, 2 * Mp + 1
    for _ in range(100):
        cols = []
        for _k in range(Mp + 1):
            g = {i: _rand_g(rng, bound) for i in range(lo, hi + 1)}
            g = {i: c for i, c in g.items() if not c.is_zero()}
            cols += [g, J_column(g)]
        try:
            return FiniteRankFrame(M, Mp, tuple(cols), quaternionic=True)
        except ValueError:
            continue
    raise RuntimeError("could not draw an independent frame")


def random_kp_frame(M: int, Mp: int, seed: int = 0, bound: int = 3) -> FiniteRankFrame:
    """W = V + conj(V): u-columns from random vectors and their J-images in v."""
    rng = random.Random(seed)
    lo, hi = -2 * M, 2 * Mp + 1
    for _ in range(100):
        cols = []
        for _k in range(Mp + 1):
            g = {i: _rand_g(rng, bound) for i in range(lo, hi + 1) if i % 2 == 0}
            g = {i: c for i, c in g.items() if not c.is_zero()}
            cols += [g, J_column(g)]
        try:
            return FiniteRankFrame(M, Mp, tuple(cols), quaternionic=True)
        except ValueError:
            continue
    raise RuntimeError("could not draw an independent frame")


def random_frame(M: int, Mp: int, seed: int = 0, bound: int = 3) -> FiniteRankFrame:
    rng = random.Random(seed)
    lo, hi = -2 * M, 2 * Mp + 1
    for _ in range(100):
        cols = [{i: _rand_g(rng, bound) for i in range(lo, hi + 1)} for _k in range(2 * (Mp + 1))]
        try:
            return FiniteRankFrame(M, Mp, tuple(cols))
        except ValueError:
            continue
    raise RuntimeError("could not draw an independent frame")


# Plücker coordinates and tau functions

def _window_rows(frame: FiniteRankFrame, S: IndexSet) -> list[int]:
    if S.virtual_cardinal != 0:
        return []
    lo_s, hi_s = S.span()
    if lo_s < frame.lo or hi_s >= frame.top:
        raise WindowError("index set outside the window")
    return S.elements_below(frame.top)


def plucker(frame: FiniteRankFrame, S: IndexSet) -> GaussianRational:
    """w^S = det of the rows of the frame matrix selected by S."""
    if S.virtual_cardinal != 0:
        return G0
    rows = _window_rows(frame, S)
    M = frame.matrix()
    return det_exact([M[i - frame.lo] for i in rows])


def plucker_support(frame: FiniteRankFrame) -> dict:
    """All S with w^S != 0, keyed by IndexSet.

    Rows that are the only non-zero entry of some column are forced; the rest
    are enumerated.
    """
    M = frame.matrix()
    r = len(frame.columns)
    nonzero_rows = [i for i in range(frame.size) if any(not x.is_zero() for x in M[i])]
    forced = set()
    for j in range(r):
        nz = [i for i in range(frame.size) if not M[i][j].is_zero()]
        if len(nz) == 1:
            forced.add(nz[0])
    free = [i for i in nonzero_rows if i not in forced]
    need = r - len(forced)
    out = {}
    if need < 0:
        return out
    for extra in itertools.combinations(free, need):
        rows = sorted(forced | set(extra))
        d = det_exact([M[i] for i in rows])
        if not d.is_zero():
            S = IndexSet.from_elements([i + frame.lo for i in rows], frame.top)
            out[S] = d
    return out


def _shifted(col: dict, h: list, lo: int, top: int, step: int = 1, parity_sel=None) -> dict:
    """Multiply a coefficient column by sum_k h_k zeta^(step*k) and keep indices < top."""
    out = {}
    for i, c in col.items():
        if parity_sel is not None and i % 2 != parity_sel:
            continue
        k = 0
        while i + step * k < top and k < len(h):
            if not h[k].is_zero():
                j = i + step * k
                out[j] = out.get(j, G0) + c * h[k]
            k += 1
    return out


def _plus_det(cols: list[dict], top: int) -> GaussianRational:
    rows = [[c.get(i, G0) for c in cols] for i in range(0, top)]
    return det_exact(rows)


def tau_W(frame: FiniteRankFrame, t) -> GaussianRational:
    """det of the plus part of exp(sum t_k zeta^k) W (interleaved variable)."""
    h = exp_coefficients(t, frame.size)
    cols = [_shifted(c, h, frame.lo, frame.top) for c in frame.columns]
    return _plus_det(cols, frame.top)


def plus_rank(frame: FiniteRankFrame, t) -> int:
    """Rank of the plus projection of exp(sum t_k zeta^k) W on the window."""
    h = exp_coefficients(t, frame.size)
    cols = [_shifted(c, h, frame.lo, frame.top) for c in frame.columns]
    return rank_exact([[c.get(i, G0) for c in cols] for i in range(0, frame.top)])


def in_big_cell(frame: FiniteRankFrame, t=()) -> bool:
    return not tau_W(frame, t).is_zero()


def schur_tau(S: IndexSet, t) -> GaussianRational:
    """tau_S(t): the plus-part determinant for H_S (a Schur polynomial in t)."""
    if S.virtual_cardinal != 0:
        raise WindowError("tau_S needs virtual cardinal zero")
    lo, hi = S.span()
    top = hi + 1
    el = S.elements_below(top)
    if not el:
        return G1
    h = exp_coefficients(t, top - min(el[0], 0))
    cols = [_shifted({i: G1}, h, lo, top) for i in el]
    return _plus_det(cols, top)


def tau_from_plucker(frame: FiniteRankFrame, t) -> GaussianRational:
    """sum_S w^S tau_S(t) over the Plücker support."""
    total = G0
    for S, w in plucker_support(frame).items():
        total = total + w * _tau_S_window(S, t, frame)
    return total


def _tau_S_window(S: IndexSet, t, frame: FiniteRankFrame) -> GaussianRational:
    h = exp_coefficients(t, frame.size)
    cols = [_shifted({i: G1}, h, frame.lo, frame.top) for i in S.elements_below(frame.top)]
    return _plus_det(cols, frame.top)


# the quaternionic tau function

def _two_time_cols(cols, t0, t1, size: int, top: int) -> list[dict]:
    h0 = exp_coefficients(t0, size)
    h1 = exp_coefficients(t1, size)
    out = []
    for c in cols:
        a = _shifted(c, h0, 0, top, step=2, parity_sel=0)
        b = _shifted(c, h1, 0, top, step=2, parity_sel=1)
        for k, v in b.items():
            a[k] = a.get(k, G0) + v
        out.append(a)
    return out


def tau_hat(frame: FiniteRankFrame, t0, t1) -> GaussianRational:
    """Plus-part determinant of W under exp(t0) on u and exp(t1) on v."""
    cols = _two_time_cols(frame.columns, t0, t1, frame.size, frame.top)
    return _plus_det(cols, frame.top)


def tau_hat_S(S: IndexSet, t0, t1, M: int, Mp: int) -> GaussianRational:
    top = 2 * Mp + 2
    cols = [{i: G1} for i in S.elements_below(top)]
    if len(cols) != top:
        return G0
    return _plus_det(_two_time_cols(cols, t0, t1, top + 2 * M, top), top)


def factorized_tau_hat_S(S: IndexSet, t0, t1) -> tuple[int, GaussianRational]:
    """(sign, tau_S0(t0) tau_S1(t1)) with the sign from the row and column reordering.

    When S0 or S1 has non-zero virtual cardinal the plus-part blocks are not
    square and the product is zero.
    """
    S0, S1 = split_S(S)
    if S0.virtual_cardinal != 0 or S1.virtual_cardinal != 0:
        return 1, G0
    top = max(S.span()[1] + 1, 2 * (max(S0.span()[1], S1.span()[1]) + 1))
    top += top % 2
    rows = list(range(0, top))
    row_perm = [i for i in rows if i % 2 == 0] + [i for i in rows if i % 2 == 1]
    el = S.elements_below(top)
    col_perm = [i for i in el if i % 2 == 0] + [i for i in el if i % 2 == 1]
    sign = -1 if (parity(row_perm) + parity(col_perm)) % 2 else 1
    return sign, schur_tau(S0, t0) * schur_tau(S1, t1)


def diagonal_polynomial(frame: FiniteRankFrame) -> dict:
    """tau_hat at t0 = (z, 0, ...), t1 = (conj z, 0, ...) as {(a, b): coeff} for z^a conj(z)^b.

    Built from the Plücker expansion; each tau_S(z, 0, ...) is a single
    monomial c_S z^|lambda_S|.
    """
    poly: dict = {}
    for S, w in plucker_support(frame).items():
        S0, S1 = split_S(S)
        if S0.virtual_cardinal != 0 or S1.virtual_cardinal != 0:
            continue
        sign, c = factorized_tau_hat_S(S, (1,), (1,))
        if c.is_zero():
            continue
        key = (S0.weight, S1.weight)
        poly[key] = poly.get(key, G0) + w * c * sign
    return {k: v for k, v in poly.items() if not v.is_zero()}


def leading_term(poly: dict) -> tuple[int, dict]:
    """Lowest total degree and the homogeneous part of that degree."""
    if not poly:
        return -1, {}
    d = min(a + b for a, b in poly)
    return d, {k: v for k, v in poly.items() if sum(k) == d}


def z1_polynomial(frame: FiniteRankFrame) -> dict:
    """tau_W(z, 0, 0, ...) as {degree: coeff}."""
    poly: dict = {}
    for S, w in plucker_support(frame).items():
        c = _tau_S_window(S, (1,), frame)
        if c.is_zero():
            continue
        poly[S.weight] = poly.get(S.weight, G0) + w * c
    return {k: v for k, v in poly.items() if not v.is_zero()}


def support_law_violations(frame: FiniteRankFrame) -> list:
    """Index sets with w^S != 0 but S0 != S1."""
    return [S for S in plucker_support(frame) if split_S(S)[0] != split_S(S)[1]]


def sigma(S: IndexSet) -> IndexSet:
    """Swap the even and odd slots: (S0, S1) -> (S1, S0)."""
    S0, S1 = split_S(S)
    return join_S(S1, S0)


# Baker functions of evaluation-condition frames

@dataclass(frozen=True)
class ConditionFrame:
    """A point of the Grassmannian cut out by evaluation conditions."""

    system: ConditionSystem

    @property
    def kp_type(self) -> bool:
        return self.system.is_complex


def baker_from_frame(frame: ConditionFrame, z):
    """Tail coefficients a_k(z) = x + j b, via the condition solver."""
    return solve_baker(frame.system, z)


def tau_json(frame: FiniteRankFrame, samples: list, seed: int = 0) -> dict:
    support = plucker_support(frame)
    items = sorted(support.items(), key=lambda kv: (sorted(kv[0].added), sorted(kv[0].removed)))
    z1 = z1_polynomial(frame)
    m = min(z1, default=-1)
    out = {
        "support": [{"S": S.to_json(), "wS": format_gaussian(w)} for S, w in items],
        "tau_samples": [{"t": [format_gaussian(_g(x)) for x in t], "tau": format_gaussian(tau_W(frame, t))}
                        for t in samples],
        "leading": {"m": m, "c": format_gaussian(z1[m]) if z1 else "0"},
    }
    if frame.quaternionic:
        d, diag = leading_term(diagonal_polynomial(frame))
        out["diagonal_leading"] = {"degree": d,
                                   "terms": [{"a": a, "b": b, "c": format_gaussian(v)}
                                             for (a, b), v in sorted(diag.items())]}
        out["support_law_violations"] = len(support_law_violations(frame))
    return out
