"""Formal dressing of the quaternionic Lax operator and the flows it generates.

L = i D + U_0 + U_1 D^-1 + U_2 D^-2 + ...  with U_0 = j(u03 + i u04) and
U_a = u_a1 + i u_a2 + j(u_a3 + i u_a4).  The dressing operator
K = 1 + sum_k a_k (i D^-1)^k satisfies L K = K (i D).  Flows are
P = K P0 K^-1 with

    s_k:  P0 = -(-i D)^k,        t_k:  P0 = -i (-i D)^k,

so that the Baker function psi = K exp(sum (s_k + i t_k) zeta^k) obeys
d_t psi + P_+ psi = 0, d_P K = P_- K and d_P L = [L, P_+].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .diffalg import ONE, ZERO, DiffPoly, Generator, d_y, formal_integrate, u
from .psdo import (
    DEFAULT_LO,
    PsdOp,
    WindowError,
    binom,
    commutator,
    compose,
    minus_part,
    plus_part,
)
from .qcore import GaussianRational, Quaternion

I_C = GaussianRational(0, 1)
_I = (DiffPoly.const(I_C), ZERO)
_ONE = (ONE, ZERO)


class DressingError(ValueError):
    pass


def _qmul(p, q):
    a1, b1 = p
    a2, b2 = q
    return (a1 * a2 - b1.conjugate() * b2, a1.conjugate() * b2 + b1 * a2)


def _qadd(p, q):
    return (p[0] + q[0], p[1] + q[1])


def _qscale(p, c):
    return (p[0].scale(c), p[1].scale(c))


def _ipow(n: int) -> GaussianRational:
    return [GaussianRational(1), I_C, GaussianRational(-1), -I_C][n % 4]


def _right_ipow(p, n: int):
    """p * i^n for a quaternion pair p (i^n is a complex constant)."""
    c = _ipow(n)
    return (p[0].scale(c), p[1].scale(c))


def _gen(alpha: int, beta: int) -> DiffPoly:
    return DiffPoly.gen(u(alpha, beta))


def symbolic_coefficient(alpha: int):
    """U_alpha as a quaternion pair of DiffPolys."""
    if alpha == 0:
        return (ZERO, _gen(0, 3) + _gen(0, 4).scale(I_C))
    return (_gen(alpha, 1) + _gen(alpha, 2).scale(I_C),
            _gen(alpha, 3) + _gen(alpha, 4).scale(I_C))


def lax_operator(lo: int = DEFAULT_LO, coefficients: dict | None = None) -> PsdOp:
    """L = i D + U_0 + sum_{a>=1} U_a D^-a, known down to exponent lo.

    ``coefficients`` may override U_alpha (as Quaternion or pair) for
    specialisations; absent entries are symbolic.
    """
    coeffs = {1: Quaternion(*_I)}
    for alpha in range(0, -lo + 1):
        if coefficients is not None and alpha in coefficients:
            q = coefficients[alpha]
            pair = (q.a, q.b) if isinstance(q, Quaternion) else q
        else:
            pair = symbolic_coefficient(alpha)
        coeffs[-alpha] = Quaternion(*pair)
    return PsdOp(coeffs, lo_valid=lo, hi=1)


def vacuum_operator(lo: int = DEFAULT_LO) -> PsdOp:
    return PsdOp({1: Quaternion(*_I)}, lo_valid=lo, hi=1)


@dataclass
class DressedPair:
    L: PsdOp
    K: PsdOp
    order: int
    a: list = field(default_factory=list)  # a[k] quaternion pairs, a[0] = 1

    @property
    def K_inverse(self) -> PsdOp:
        inv = getattr(self, "_kinv", None)
        if inv is None:
            inv = series_inverse(self.K)
            object.__setattr__(self, "_kinv", inv)
        return inv

    def coefficient(self, k: int) -> Quaternion:
        return Quaternion(*self.a[k])


def series_inverse(K: PsdOp) -> PsdOp:
    """Inverse of 1 + (negative order terms) inside K's window."""
    if K.hi != 0 or K.coeff(0) != Quaternion(ONE, ZERO):
        raise DressingError("series inverse needs leading coefficient 1 at order 0")
    lo = K.lo_valid if K.lo_valid is not None else DEFAULT_LO
    M = minus_part(K).with_lo(lo)
    one = PsdOp.scalar(1)
    X = one
    for _ in range(-lo):
        X = one - compose(M, X, lo)
    return X.with_lo(lo)


def _L_coeff(L: PsdOp, alpha: int):
    """U_alpha pair from L (coefficient at exponent -alpha)."""
    q = L.coeff(-alpha)
    return (q.a, q.b)


def _equation(L: PsdOp, a: list, n: int, derivs: dict):
    """Coefficient at D^(1-n) of L K - K (i D), with a_n treated as zero."""
    total = (ZERO, ZERO)
    if n - 1 >= 1:
        # i D o a_{n-1} i^{n-1} D^{1-n} contributes i a'_{n-1} i^{n-1}
        total = _qadd(total, _right_ipow(_qmul(_I, _deriv(a, n - 1, 1, derivs)), n - 1))
    for alpha in range(0, n):
        Ua = _L_coeff(L, alpha)
        if Ua[0].is_zero() and Ua[1].is_zero():
            continue
        for k in range(0, n - alpha):
            m = n - 1 - alpha - k
            c = binom(-alpha, m)
            if c == 0:
                continue
            term = _qmul(Ua, _deriv(a, k, m, derivs))
            total = _qadd(total, _qscale(_right_ipow(term, k), c))
    return total


def _deriv(a: list, k: int, m: int, derivs: dict):
    key = (k, m)
    v = derivs.get(key)
    if v is None:
        base = a[k] if m == 0 else _deriv(a, k, m - 1, derivs)
        v = base if m == 0 else (d_y(base[0]), d_y(base[1]))
        derivs[key] = v
    return v


def dress(L: PsdOp, N: int = 4) -> DressedPair:
    """Solve L K = K (i D) for a_1..a_N with zero integration constants."""
    if L.lo_valid is None or L.lo_valid > -N:
        raise DressingError(f"window lo_valid={L.lo_valid} too shallow for depth {N}")
    if L.coeff(1) != Quaternion(*_I):
        raise DressingError("leading coefficient of L must be i")
    if not L.coeff(0).a.is_zero():
        raise DressingError("U_0 must anticommute with i")
    a = [_ONE] + [(ZERO, ZERO) for _ in range(N)]
    for n in range(1, N + 2):
        derivs: dict = {}
        if n >= 2:
            # commuting part of a_{n-1} from the i-commuting part of the equation
            E = _equation(L, a, n, derivs)
            # i c' i^{n-1} + comm(E) = 0  =>  c' = -comm(E) i^{-n}
            cprime = E[0].scale(-_ipow(-n))
            c = formal_integrate(cprime) if not cprime.is_zero() else ZERO
            a[n - 1] = (c, a[n - 1][1])
            derivs = {}
        if n > N:
            break
        E = _equation(L, a, n, derivs)
        if not E[0].is_zero():
            raise DressingError(f"commuting residual at order {n}")
        # [i, j d] i^n = j(-2 i^{n+1} d) must cancel j e
        d = E[1].scale(_ipow(-(n + 1)) * GaussianRational(Fraction(1, 2)))
        a[n] = (a[n][0], d)
    coeffs = {0: Quaternion(ONE, ZERO)}
    for k in range(1, N + 1):
        coeffs[-k] = Quaternion(*_right_ipow(a[k], k))
    K = PsdOp(coeffs, lo_valid=-N, hi=0)
    return DressedPair(L=L, K=K, order=N, a=a)


def dressing_residual(dp: DressedPair) -> PsdOp:
    """K^-1 L K - i D inside the window where it is determined."""
    LK = compose(dp.L, dp.K)
    res = compose(dp.K_inverse, LK)
    return res - PsdOp.d(1, Quaternion(*_I))


def bare_operator(k: int, direction: str) -> PsdOp:
    """P0 for the s_k or t_k flow as an exact constant-coefficient operator."""
    if k < 1:
        raise ValueError("flow index must be >= 1")
    minus_i_pow = (-I_C) ** k
    if direction == "s":
        c = -minus_i_pow
    elif direction == "t":
        c = -(I_C * minus_i_pow)
    else:
        raise ValueError("direction must be 's' or 't'")
    return PsdOp.d(k, Quaternion(DiffPoly.const(c), ZERO))


def full_flow(dp: DressedPair, k: int, direction: str) -> PsdOp:
    P0 = bare_operator(k, direction)
    if dp.order < k:
        raise DressingError(f"depth {dp.order} too shallow for flow {direction}{k}")
    return compose(compose(dp.K, P0), dp.K_inverse)


def flow_generator(dp: DressedPair, k: int, direction: str) -> PsdOp:
    """P_+ for the flow (k, direction); must be free of antiderivative symbols."""
    P = full_flow(dp, k, direction)
    Pp = plus_part(P)
    for e, q in Pp.items():
        if q.a.has_family("A") or q.b.has_family("A"):
            raise DressingError(f"antiderivative symbol survives in P_+ at D^{e}")
    return Pp


@dataclass
class FlowDerivation:
    name: str
    velocities: dict  # Generator (order 0, family U) -> DiffPoly

    def apply(self, p: DiffPoly) -> DiffPoly:
        """Extend to the whole algebra: derivation commuting with d_y."""
        out = ZERO
        for mono, c in p.raw_terms().items():
            for idx, g in enumerate(mono):
                if idx > 0 and mono[idx - 1] == g:
                    continue
                mult = mono.count(g)
                rest = mono[:idx] + mono[idx + 1:]
                vel = self.velocity(g)
                if vel.is_zero():
                    continue
                term = DiffPoly({rest: (c[0] * mult, c[1] * mult)}) * vel
                out = out + term
        return out

    def velocity(self, g: Generator) -> DiffPoly:
        if g.family != "U":
            raise DressingError("flow of an antiderivative symbol is not defined")
        base = Generator("U", g.alpha, g.beta, 0)
        v = self.velocities.get(base)
        if v is None:
            raise WindowError(f"velocity of {base.name()} outside the window")
        return d_y(v, g.order) if g.order else v


def _flow_name(k: int, direction: str) -> str:
    return f"{direction}{k}"


def lax_rhs(dp: DressedPair, Pp: PsdOp, name: str = "P") -> FlowDerivation:
    """Velocities of the U generators read off from [L, P_+]."""
    R = commutator(dp.L, Pp)
    lo = R.lo_valid
    for e in R.exponents():
        if e >= 1:
            raise DressingError(f"[L, P_+] has a term at D^{e}")
    q0 = R.coeff(0)
    if not q0.a.is_zero():
        raise DressingError("[L, P_+] has an i-commuting part at D^0")
    vel: dict = {}
    _read_components(vel, 0, (ZERO, q0.b), dp.L)
    alpha = 1
    while lo is None or -alpha >= lo:
        if -alpha < (dp.L.lo_valid or -alpha):
            break
        q = R.coeff(-alpha)
        _read_components(vel, alpha, (q.a, q.b), dp.L)
        alpha += 1
        if lo is None and alpha > -DEFAULT_LO:
            break
    return FlowDerivation(name=name, velocities=vel)


def _read_components(vel: dict, alpha: int, pair, L: PsdOp) -> None:
    a, b = pair
    sym = symbolic_coefficient(alpha)
    if L.coeff(-alpha) != Quaternion(*sym):
        return
    if alpha == 0:
        vel[u(0, 3)] = b.real_part()
        vel[u(0, 4)] = b.imag_part()
        return
    vel[u(alpha, 1)] = a.real_part()
    vel[u(alpha, 2)] = a.imag_part()
    vel[u(alpha, 3)] = b.real_part()
    vel[u(alpha, 4)] = b.imag_part()


def apply_derivation(A: PsdOp, flow: FlowDerivation) -> PsdOp:
    return A.map_coeffs(lambda q: (flow.apply(q[0]), flow.apply(q[1])))


def zero_curvature_residual(dp: DressedPair, P: tuple, Q: tuple) -> PsdOp:
    """d_P Q_+ - d_Q P_+ - [Q_+, P_+] for flows given as (k, direction)."""
    Pp = flow_generator(dp, *P)
    Qp = flow_generator(dp, *Q)
    fP = lax_rhs(dp, Pp, _flow_name(*P))
    fQ = lax_rhs(dp, Qp, _flow_name(*Q))
    return apply_derivation(Qp, fP) - apply_derivation(Pp, fQ) - commutator(Qp, Pp)


def dirac_potential(dp: DressedPair) -> Quaternion:
    """-(a_1 + i a_1 i)/2, the i-anticommuting part of a_1 with a sign."""
    a1 = dp.a[1]
    ia1i = _qmul(_qmul(_I, a1), _I)
    s = _qadd(a1, ia1i)
    return Quaternion(s[0].scale(Fraction(-1, 2)), s[1].scale(Fraction(-1, 2)))


def has_antiderivatives(A: PsdOp) -> bool:
    return any(q.a.has_family("A") or q.b.has_family("A") for _, q in A.items())
