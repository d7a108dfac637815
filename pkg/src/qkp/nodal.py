"""Baker functions cut out by finitely many evaluation conditions, and Darboux transforms.

A condition reads psi(z, p) = psi(z, q) h with a fixed quaternion h.  With
the ansatz psi = (1 + sum_{k<=N} a_k zeta^-k) e^(z zeta) and N conditions
this is a square left-quaternionic linear system for a_1..a_N, solved
through its 2N x 2N complex form.

Quaternion fields are pairs of complex arrays (a, b) meaning a + j b.
Derivatives act with i on the left, so on components

    d/dz    (a + jb) = a_z    + j b_zbar,
    d/dzbar (a + jb) = a_zbar + j b_z,

and the Dirac operator is d/dzbar + j u.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geomzero import (
    DivisorS,
    LatticePair,
    SpectralDataG0,
    dirac_residual,
    fd_derivative,
    fd_dirac_residual,
)
from .qcore import qinv_arrays, qmul_arrays


class SingularSystemError(ArithmeticError):
    """The condition matrix is singular at some z (the orbit leaves the big cell)."""

    def __init__(self, msg, condition_number=math.inf, z=None):
        super().__init__(msg)
        self.condition_number = condition_number
        self.z = z


class DarbouxError(ValueError):
    pass


@dataclass(frozen=True)
class Condition:
    """psi(z, p) = psi(z, q) * (h_a + j h_b)."""

    p: complex
    q: complex
    h: tuple = (1.0, 0.0)


@dataclass(frozen=True)
class ConditionSystem:
    conditions: tuple

    def __post_init__(self):
        conds = tuple(self.conditions)
        for c in conds:
            if abs(c.p) <= 1 or abs(c.q) <= 1:
                raise ValueError("evaluation points must satisfy |p|, |q| > 1")
            if c.p == c.q:
                raise ValueError("a condition must compare two distinct points")
        object.__setattr__(self, "conditions", conds)

    @property
    def depth(self) -> int:
        return len(self.conditions)

    @property
    def is_complex(self) -> bool:
        """All weights complex, so W i = W and the hierarchy reduces to KP."""
        return all(complex(c.h[1]) == 0 for c in self.conditions)

    def system(self, z):
        """Stacked complex matrices M (nz, 2N, 2N) and right-hand sides (nz, 2N).

        Unknowns are (x_1..x_N, y_1..y_N) with a_k = x_k + j conj(y_k).
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        N = self.depth
        M = np.zeros(z.shape + (2 * N, 2 * N), dtype=complex)
        r = np.zeros(z.shape + (2 * N,), dtype=complex)
        for c, cond in enumerate(self.conditions):
            ha, hb = complex(cond.h[0]), complex(cond.h[1])
            ep, eq = np.exp(z * cond.p), np.exp(z * cond.q)
            for k in range(1, N + 1):
                w = cond.q ** -k * eq
                ca = cond.p ** -k * ep - w * ha
                cb = -np.conj(w) * hb
                # a_k C = (x ca - conj(b) cb) + j(conj(x) cb + b ca)
                M[..., c, k - 1] = ca
                M[..., c, N + k - 1] = -cb
                M[..., N + c, k - 1] = np.conj(cb)
                M[..., N + c, N + k - 1] = np.conj(ca)
            r[..., c] = eq * ha - ep
            r[..., N + c] = np.conj(np.conj(eq) * hb)
        return M, r


@dataclass
class NodalSample:
    """Solved tail coefficients a_k(z) as arrays of shape (N, nz)."""

    z: np.ndarray
    a: np.ndarray
    b: np.ndarray
    condition_number: np.ndarray


def solve_baker(cs: ConditionSystem, z, max_cond: float = 1e12) -> NodalSample:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    N = cs.depth
    if N == 0:
        empty = np.zeros((0,) + z.shape, dtype=complex)
        return NodalSample(z, empty, empty, np.ones(z.shape))
    M, r = cs.system(z)
    cond = np.linalg.cond(M)
    bad = ~np.isfinite(cond) | (cond > max_cond)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise SingularSystemError(f"singular condition system at z = {z.ravel()[k]}",
                                  float(cond.ravel()[k]), complex(z.ravel()[k]))
    sol = np.linalg.solve(M, r[..., None])[..., 0]
    x = np.moveaxis(sol[..., :N], -1, 0)
    y = np.moveaxis(sol[..., N:], -1, 0)
    return NodalSample(z, x, np.conj(y), cond)


def scan_conditioning(cs: ConditionSystem, z, max_cond: float = 1e12) -> tuple[np.ndarray, np.ndarray]:
    """Condition numbers over a z array and the mask of singular solves."""
    M, _ = cs.system(z)
    cond = np.linalg.cond(M)
    return cond, ~np.isfinite(cond) | (cond > max_cond)


class BakerSource:
    """psi(z, zeta) = (1 + a_1(z)/zeta + ...) e^(z zeta) with quaternion tail.

    Subclasses provide ``psi`` and ``a1``; derivatives default to central
    differences with step ``fd_step``.
    """

    fd_step = 1e-3
    fd_order = 8

    def psi(self, z, zeta):
        raise NotImplementedError

    def a1(self, z):
        raise NotImplementedError

    def _partials(self, z, zeta):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        h = self.fd_step
        k = self.fd_order // 2
        offs = np.arange(-k, k + 1) * h
        out = []
        for direction in (1, 1j):
            stack = [self.psi(z + direction * o, zeta) for o in offs]
            a = np.stack([s[0] for s in stack])
            b = np.stack([s[1] for s in stack])
            out.append((fd_derivative(a, h, 0, self.fd_order)[0],
                        fd_derivative(b, h, 0, self.fd_order)[0]))
        return out

    def dz(self, z, zeta):
        (ax, bx), (ay, by) = self._partials(z, zeta)
        return (ax - 1j * ay) / 2, (bx + 1j * by) / 2

    def dzbar(self, z, zeta):
        (ax, bx), (ay, by) = self._partials(z, zeta)
        return (ax + 1j * ay) / 2, (bx - 1j * by) / 2

    def potential(self, z):
        """u with U = j u = -(a_1 + i a_1 i)/2."""
        return -self.a1(z)[1]

    def dirac_residual(self, z, zeta):
        a, b = self.psi(z, zeta)
        da, db = self.dzbar(z, zeta)
        u = self.potential(z)
        return dirac_residual(u, a, b, da, db)


class ConstantTailBaker(BakerSource):
    """psi = s(zeta) exp(z zeta - zbar c / zeta) with a z-independent tail s.

    Covers the genus-zero family and everything reached from it by Darboux
    steps; all derivatives are exact.
    """

    def __init__(self, tail, s1, c: float = 0.0):
        self.tail = tail
        self.s1 = s1
        self.c = float(c)

    @classmethod
    def vacuum(cls) -> "ConstantTailBaker":
        return cls(lambda zeta: (np.ones_like(zeta), np.zeros_like(zeta)), (0j, 0j), 0.0)

    @classmethod
    def from_genus0(cls, d: SpectralDataG0) -> "ConstantTailBaker":
        eps = d.epsilon
        return cls(lambda zeta: (np.ones_like(zeta), -eps / zeta), (0j, -eps), abs(eps) ** 2)

    def _E(self, z, zeta):
        z = np.asarray(z, dtype=complex)
        return np.exp(z * zeta - np.conj(z) * self.c / zeta)

    def _tail(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        return self.tail(zeta)

    def psi(self, z, zeta):
        sa, sb = self._tail(zeta)
        E = self._E(z, zeta)
        return sa * E, sb * E

    def dz_tail(self, zeta):
        sa, sb = self._tail(zeta)
        return sa * zeta, -sb * self.c / zeta

    def dz(self, z, zeta):
        ta, tb = self.dz_tail(zeta)
        E = self._E(z, zeta)
        return ta * E, tb * E

    def dzbar(self, z, zeta):
        sa, sb = self._tail(zeta)
        E = self._E(z, zeta)
        return -sa * self.c / zeta * E, sb * zeta * E

    def a1(self, z):
        z = np.asarray(z, dtype=complex)
        return self.s1[0] - np.conj(z) * self.c, self.s1[1] + 0 * z


class NodalBaker(BakerSource):
    def __init__(self, cs: ConditionSystem, max_cond: float = 1e12):
        self.cs = cs
        self.max_cond = max_cond

    def coefficients(self, z) -> NodalSample:
        return solve_baker(self.cs, z, self.max_cond)

    def psi(self, z, zeta):
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        s = self.coefficients(z.ravel())
        zeta = np.asarray(zeta, dtype=complex)
        sa = np.ones(s.z.shape, dtype=complex)
        sb = np.zeros(s.z.shape, dtype=complex)
        for k in range(self.cs.depth):
            sa = sa + s.a[k] * zeta ** -(k + 1)
            sb = sb + s.b[k] * zeta ** -(k + 1)
        e = np.exp(s.z * zeta)
        return (sa * e).reshape(shape), (sb * e).reshape(shape)

    def a1(self, z):
        z = np.asarray(z, dtype=complex)
        if self.cs.depth == 0:
            return np.zeros(z.shape, dtype=complex), np.zeros(z.shape, dtype=complex)
        s = self.coefficients(z.ravel())
        return s.a[0].reshape(z.shape), s.b[0].reshape(z.shape)

    def closure_residual(self, z) -> float:
        """max |j psi(p) - j psi(q) h| over the conditions: j W = W at runtime."""
        worst = 0.0
        for c in self.cs.conditions:
            pa, pb = self.psi(z, c.p)
            qa, qb = self.psi(z, c.q)
            # left multiplication by j: j(a + jb) = -b + j a
            ja, jb = -pb, pa
            ka, kb = -qb, qa
            ra, rb = qmul_arrays(ka, kb, complex(c.h[0]), complex(c.h[1]))
            worst = max(worst, float(np.max(np.abs(ja - ra) + np.abs(jb - rb))))
        return worst


def potential_from_baker(source: BakerSource, z) -> np.ndarray:
    return source.potential(z)


def _check_kappa(kappa: complex):
    if abs(kappa) <= 1:
        raise DarbouxError("need |kappa| > 1")


class DarbouxBaker(BakerSource):
    """psi^kappa = [(d/dz - v) psi](zeta - kappa)^-1, v = (d/dz phi) phi^-1, phi = psi(., kappa)."""

    def __init__(self, source: BakerSource, kappa: complex, phi_tol: float = 1e-12):
        _check_kappa(kappa)
        self.source = source
        self.kappa = complex(kappa)
        self.phi_tol = phi_tol

    def v(self, z):
        pa, pb = self.source.psi(z, self.kappa)
        n = np.sqrt(np.abs(pa) ** 2 + np.abs(pb) ** 2)
        if np.any(n <= self.phi_tol):
            raise DarbouxError("psi(z, kappa) vanishes: the transform is singular here")
        da, db = self.source.dz(z, self.kappa)
        return qmul_arrays(da, db, *qinv_arrays(pa, pb))

    def psi(self, z, zeta):
        va, vb = self.v(z)
        pa, pb = self.source.psi(z, zeta)
        da, db = self.source.dz(z, zeta)
        ma, mb = qmul_arrays(va, vb, pa, pb)
        return (da - ma) / (zeta - self.kappa), (db - mb) / (zeta - self.kappa)

    def a1(self, z):
        a, _ = self.source.a1(z)
        va, vb = self.v(z)
        return self.kappa + a - va, -vb


def darboux(source: BakerSource, kappa: complex) -> BakerSource:
    """One Darboux step; closed form when the source has a constant tail."""
    _check_kappa(kappa)
    if not isinstance(source, ConstantTailBaker):
        return DarbouxBaker(source, kappa)
    kappa = complex(kappa)
    sa, sb = source._tail(kappa)
    if abs(sa) ** 2 + abs(sb) ** 2 == 0:
        raise DarbouxError("psi(z, kappa) vanishes: the transform is singular")
    ta, tb = source.dz_tail(kappa)
    va, vb = qmul_arrays(ta, tb, *qinv_arrays(sa, sb))
    va, vb = complex(va), complex(vb)

    R = 0.05 * abs(kappa)
    ring = kappa + R * np.exp(2j * np.pi * np.arange(64) / 64)
    ring_a, ring_b = _numerator(source, va, vb, ring)
    ring_a, ring_b = ring_a / (ring - kappa), ring_b / (ring - kappa)

    def tail(zeta, _src=source):
        num_a, num_b = _numerator(_src, va, vb, zeta)
        den = zeta - kappa
        near = np.abs(den) < R / 4
        if not np.any(near):
            return num_a / den, num_b / den
        # removable singularity at kappa: Cauchy integral over a circle around it
        w = (ring - kappa) / (ring[None, :] - np.atleast_1d(zeta)[..., None]) / ring.size
        ca = (w * ring_a).sum(axis=-1).reshape(np.shape(zeta))
        cb = (w * ring_b).sum(axis=-1).reshape(np.shape(zeta))
        safe = np.where(near, 1, den)
        return np.where(near, ca, num_a / safe), np.where(near, cb, num_b / safe)

    s1 = (kappa + source.s1[0] - va, -vb)
    out = ConstantTailBaker(tail, s1, source.c)
    out.kappa = kappa
    out.v = (va, vb)
    return out


def _numerator(src: ConstantTailBaker, va, vb, zeta):
    zeta = np.asarray(zeta, dtype=complex)
    ta, tb = src.dz_tail(zeta)
    sa, sb = src._tail(zeta)
    ma, mb = qmul_arrays(va, vb, sa, sb)
    return ta - ma, tb - mb


def tildef_residual(source: BakerSource, transformed: BakerSource, kappa: complex, z, zetas) -> float:
    """Residual of d/dz psi_W = b psi_W - kappa psi^kappa (1 - zeta/kappa).

    Here psi^kappa belongs to W' = W (1 - zeta/kappa)^-1, so W = W'(1 - zeta/kappa)
    and b = (d/dz psi_W(z, kappa)) psi_W(z, kappa)^-1.
    """
    z = np.asarray(z, dtype=complex)
    pa, pb = source.psi(z, kappa)
    da, db = source.dz(z, kappa)
    ba, bb = qmul_arrays(da, db, *qinv_arrays(pa, pb))
    worst = 0.0
    for zeta in np.atleast_1d(zetas):
        wa, wb = source.psi(z, zeta)
        ga, gb = source.dz(z, zeta)
        ta, tb = transformed.psi(z, zeta)
        ma, mb = qmul_arrays(ba, bb, wa, wb)
        f = kappa * (1 - zeta / kappa)
        ra, rb = ga - ma + f * ta, gb - mb + f * tb
        scale = 1 + np.abs(ga) + np.abs(gb)
        worst = max(worst, float(np.max((np.abs(ra) + np.abs(rb)) / scale)))
    return worst


def darboux_periodicity_check(d: SpectralDataG0, lp: LatticePair, S: DivisorS, kappa: complex,
                              zs=None, seed: int = 0) -> dict:
    """Monodromy defects of the transformed Baker function at the divisor points."""
    zetas = [d.epsilon * eta for eta in S.points]
    for zt in zetas:
        if abs(zt - kappa) < 1e-9:
            raise DarbouxError("kappa coincides with a divisor point")
    t = darboux(ConstantTailBaker.from_genus0(d), kappa)
    if zs is None:
        rng = np.random.default_rng(seed)
        zs = rng.uniform(-1, 1, 100) + 1j * rng.uniform(-1, 1, 100)
    zs = np.asarray(zs, dtype=complex)
    defects = []
    for zt in zetas:
        a0, b0 = t.psi(zs, zt)
        norm = np.max(np.sqrt(np.abs(a0) ** 2 + np.abs(b0) ** 2))
        row = []
        for lam, mu in zip(lp.gens, lp.mu):
            a1, b1 = t.psi(zs + lam, zt)
            err = np.sqrt(np.abs(a1 - a0 / mu) ** 2 + np.abs(b1 - b0 / mu) ** 2)
            row.append(float(np.max(err) / max(1.0, norm)))
        defects.append(row)
    return {"kappa": [kappa.real, kappa.imag], "defects": defects,
            "max_defect": max((max(r) for r in defects), default=0.0)}


def grid_dirac_residual(source: BakerSource, zeta: complex, center: complex = 0j,
                        half_width: float = 0.1, n: int = 41, order: int = 8) -> float:
    """Finite-difference Dirac residual on an n x n grid using the extracted potential."""
    xs = np.linspace(-half_width, half_width, n)
    h = xs[1] - xs[0]
    X, Y = np.meshgrid(xs, xs)
    Z = center + X + 1j * Y
    a, b = source.psi(Z, zeta)
    u = source.potential(Z)
    res = fd_dirac_residual(u, a, b, h, order)
    scale = np.max(np.sqrt(np.abs(a) ** 2 + np.abs(b) ** 2))
    return float(np.max(res) / max(1.0, scale))
