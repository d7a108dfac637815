"""Genus-zero spectral data: closed-form Baker functions and the tori they define.

The curve is the eta-sphere with real structure eta -> -1/conj(eta), the
point at infinity P and the Dirac potential U = j*eps.  In the
coordinate zeta = eps*eta the Baker function is

    psi(z, eta) = (1 - j/eta) E(z, eta),   E = exp(z eps eta - conj(z eps) / eta).

On |eta| = 1 the exponent equals pi*i*<beta(eta), z> with
conj(beta(eta)) = 2 eps eta / (pi i) and <w, z> = Re(w conj(z)).  We fix
q0 = i, so beta0 = 2 conj(eps) / pi.

Lattices: beta0 and beta1 = beta(q1) must give the same monodromy, so the
dual lattice is taken to be Z<beta0, (beta1 - beta0)/2>, the smallest one
containing both with beta1 - beta0 in 2 Lambda*.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .qcore import GaussianRational, Quaternion, qinv, qmul

DEFAULT_BOX = 64
DEFAULT_TOL = 1e-9


class LatticeError(ValueError):
    """Degenerate or inconsistent lattice data."""


class PunctureError(ValueError):
    """Evaluation at eta = 0 or eta = infinity."""


class IllPositionedError(ArithmeticError):
    """All homogeneous coordinates vanish simultaneously."""


class GridError(ValueError):
    """Grid too coarse for the requested derivative stencil."""


def inner(w, z) -> float:
    """<w, z> = (w conj(z) + conj(w) z) / 2."""
    return (complex(w) * complex(z).conjugate()).real


@dataclass(frozen=True)
class SpectralDataG0:
    epsilon: complex

    def __post_init__(self):
        e = complex(self.epsilon)
        if not 0 < abs(e) < 1:
            raise ValueError("need 0 < |epsilon| < 1")
        object.__setattr__(self, "epsilon", e)

    @property
    def r(self) -> float:
        return abs(self.epsilon)

    @property
    def beta0(self) -> complex:
        return 2 * self.epsilon.conjugate() / math.pi

    def beta(self, q: complex) -> complex:
        """beta(q) with conj(beta) = 2 eps q / (pi i); meaningful for |q| = 1."""
        return (2 * self.epsilon * complex(q) / (math.pi * 1j)).conjugate()

    def to_json(self) -> dict:
        return {"epsilon": [self.epsilon.real, self.epsilon.imag],
                "beta0": [self.beta0.real, self.beta0.imag]}


def _exponent(d: SpectralDataG0, z, eta):
    eps = d.epsilon
    return z * eps * eta - np.conj(z) * np.conj(eps) / eta


def baker_arrays(d: SpectralDataG0, z, eta):
    """Vectorised Baker function as complex arrays (a, b) meaning a + j b."""
    eta = np.asarray(eta, dtype=complex)
    if np.any(eta == 0):
        raise PunctureError("eta = 0 is the point rho(P)")
    E = np.exp(_exponent(d, np.asarray(z, dtype=complex), eta))
    return E, -E / eta


def baker_derivatives(d: SpectralDataG0, z, eta):
    """(a, b, da/dzbar, db/dz) with exact derivatives of the closed form."""
    a, b = baker_arrays(d, z, eta)
    eps = d.epsilon
    return a, b, -np.conj(eps) / eta * a, eps * eta * b


def baker_g0(d: SpectralDataG0, z: complex, eta: complex) -> Quaternion:
    if eta == 0:
        raise PunctureError("eta = 0 is the point rho(P)")
    a, b = baker_arrays(d, complex(z), complex(eta))
    return Quaternion(complex(a), complex(b))


def baker_g0_zeta(d: SpectralDataG0, z: complex, zeta: complex) -> Quaternion:
    """The same function in the coordinate zeta = eps * eta."""
    return baker_g0(d, z, complex(zeta) / d.epsilon)


def dirac_apply(u, a, b, da_dzbar, db_dz):
    """D(a + jb) for D = d/dzbar + j u, returned as (c, e) meaning c + j e."""
    return da_dzbar - np.conj(u) * b, db_dz + u * a


def dirac_residual(u, a, b, da_dzbar, db_dz):
    c, e = dirac_apply(u, a, b, da_dzbar, db_dz)
    return np.sqrt(np.abs(c) ** 2 + np.abs(e) ** 2)


# central first-derivative stencils (offsets 1..k, antisymmetric)
_STENCILS = {
    2: [1 / 2],
    4: [2 / 3, -1 / 12],
    6: [3 / 4, -3 / 20, 1 / 60],
    8: [4 / 5, -1 / 5, 4 / 105, -1 / 280],
}


def fd_derivative(f: np.ndarray, h: float, axis: int, order: int = 8) -> np.ndarray:
    """Central difference on interior points; output shrinks by the stencil width."""
    w = _STENCILS.get(order)
    if w is None:
        raise ValueError(f"unsupported stencil order {order}")
    k = len(w)
    n = f.shape[axis]
    if n < 2 * k + 1:
        raise GridError(f"need at least {2 * k + 1} points along axis {axis}, got {n}")
    f = np.moveaxis(f, axis, 0)
    out = np.zeros((n - 2 * k,) + f.shape[1:], dtype=complex)
    for s, c in enumerate(w, start=1):
        out += c * (f[k + s:n - k + s] - f[k - s:n - k - s])
    return np.moveaxis(out / h, 0, axis)


def _interior(f: np.ndarray, k: int) -> np.ndarray:
    return f[k:-k, k:-k]


def fd_dirac_residual(u, a: np.ndarray, b: np.ndarray, h: float, order: int = 8):
    """Dirac residual on the interior of a square grid indexed [iy, ix].

    ``u`` is a scalar or an array on the same grid.
    """
    k = order // 2
    ax = fd_derivative(a, h, 1, order)[k:-k, :]
    ay = fd_derivative(a, h, 0, order)[:, k:-k]
    bx = fd_derivative(b, h, 1, order)[k:-k, :]
    by = fd_derivative(b, h, 0, order)[:, k:-k]
    uu = u if np.isscalar(u) else _interior(np.asarray(u), k)
    return dirac_residual(uu, _interior(a, k), _interior(b, k),
                          (ax + 1j * ay) / 2, (bx - 1j * by) / 2)


def _exact_unimodular(q: complex) -> GaussianRational | None:
    """Gaussian-rational form of q when it is one (within float rounding)."""
    re = Fraction(q.real).limit_denominator(10 ** 6)
    im = Fraction(q.imag).limit_denominator(10 ** 6)
    g = GaussianRational(re, im)
    if g.norm() != 1 or abs(complex(g) - q) > 1e-15:
        return None
    return g


@dataclass(frozen=True)
class LatticePair:
    """Period lattice built from two evaluation points q0 = i and q1.

    The dual lattice is beta0 * Z<1, c> with c = (tau - 1)/2 and
    tau = beta1 / beta0 = i conj(q1); ``shape`` holds c, exactly when q1 is a
    Gaussian rational.
    """

    beta0: complex
    beta1: complex
    dual_basis: tuple
    gens: tuple
    mu: tuple
    shape: object
    tol: float = DEFAULT_TOL

    @property
    def dual_gens(self) -> tuple:
        return (self.beta0, self.beta1)

    @property
    def area(self) -> float:
        l1, l2 = self.gens
        return abs((l1.conjugate() * l2).imag)

    def mu_of(self, lam: complex) -> int:
        v = inner(self.beta0, lam)
        k = round(v)
        if abs(v - k) > self.tol:
            raise LatticeError(f"{lam} is not a lattice vector")
        return -1 if k % 2 else 1

    def in_dual(self, alpha: complex) -> bool:
        return all(abs(inner(alpha, lam) - round(inner(alpha, lam))) <= self.tol for lam in self.gens)

    def to_json(self) -> list:
        return [[g.real, g.imag] for g in self.gens]


def dual_basis_of(b1: complex, b2: complex) -> tuple[complex, complex]:
    """The basis l1, l2 with <b_i, l_j> = delta_ij."""
    B = np.array([[b1.real, b1.imag], [b2.real, b2.imag]])
    if abs(np.linalg.det(B)) < 1e-14 * (abs(b1) * abs(b2) + 1e-300):
        raise LatticeError("basis vectors are colinear over R")
    L = np.linalg.inv(B)
    return complex(L[0, 0], L[1, 0]), complex(L[0, 1], L[1, 1])


def lattice_from_pair(d: SpectralDataG0, q1: complex, tol: float = DEFAULT_TOL) -> LatticePair:
    q1 = complex(q1)
    if abs(abs(q1) - 1) > tol:
        raise LatticeError("q1 must lie on the unit circle")
    b0 = d.beta0
    b1 = d.beta(q1)
    if abs((b0.conjugate() * b1).imag) <= tol * abs(b0) * abs(b1):
        raise LatticeError("beta0 and beta1 are colinear over R (q1 = i or q1 = -i)")
    half = (b1 - b0) / 2
    gens = dual_basis_of(b0, half)
    for b in (b0, b1):
        for lam in gens:
            v = inner(b, lam)
            if abs(v - round(v)) > tol:
                raise LatticeError("duality pairing is not integral")
    mu = tuple(-1 if round(inner(b0, lam)) % 2 else 1 for lam in gens)
    g = _exact_unimodular(q1)
    if g is not None:
        shape = (GaussianRational(0, 1) * g.conjugate() - 1) / 2
    else:
        shape = (1j * q1.conjugate() - 1) / 2
    return LatticePair(b0, b1, (b0, half), gens, mu, shape, tol)


@dataclass(frozen=True)
class DivisorS:
    """Trivial-multiplier points, with the dual-lattice coefficients that produced them."""

    points: tuple
    alphas: tuple
    coefficients: tuple
    degenerate: bool = field(default=False)

    def __len__(self):
        return len(self.points)

    def to_json(self) -> list:
        return [[p.real, p.imag] for p in self.points]


def circle_coefficients(shape, box: int = DEFAULT_BOX, tol: float = DEFAULT_TOL) -> list[tuple[int, int]]:
    """(m, n) in the box with |m + n*shape| = 1; exact when shape is a Gaussian rational."""
    exact = isinstance(shape, GaussianRational)
    out = []
    for m in range(-box, box + 1):
        for n in range(-box, box + 1):
            if exact:
                c = shape * n + m
                if c.norm() == 1:
                    out.append((m, n))
            else:
                if abs(abs(m + n * complex(shape)) - 1) <= tol:
                    out.append((m, n))
    return out


def enumerate_S(lp: LatticePair, box: int = DEFAULT_BOX) -> DivisorS:
    """Points eta = i conj(alpha)/conj(beta0) for alpha in Lambda* with |alpha| = |beta0|
    and (alpha - beta0)/2 in Lambda*.

    In the basis (beta0, (beta1 - beta0)/2) the half condition reads m odd,
    n even, which is checked exactly.
    """
    pts, alphas, coeffs = [], [], []
    for m, n in circle_coefficients(lp.shape, box, lp.tol):
        if m % 2 != 1 or n % 2 != 0:
            continue
        c = m + n * complex(lp.shape)
        alphas.append(lp.beta0 * c)
        pts.append(1j * c.conjugate())
        coeffs.append((m, n))
    return DivisorS(tuple(pts), tuple(alphas), tuple(coeffs), degenerate=len(pts) <= 1)


def torus_map(d: SpectralDataG0, lp: LatticePair, S: DivisorS, z: complex) -> list[Quaternion]:
    """Homogeneous coordinates [psi(z, Q_0), ..., psi(z, Q_n)] of the torus in HP^n."""
    if not S.points:
        raise ValueError("empty divisor")
    coords = [baker_g0(d, z, eta) for eta in S.points]
    if all(abs(q.a) == 0 and abs(q.b) == 0 for q in coords):
        raise IllPositionedError(f"all coordinates vanish at z = {z}")
    return coords


def fundamental_grid(lp: LatticePair, n: int) -> np.ndarray:
    """z = (s/n) l1 + (t/n) l2 for s, t in 0..n-1, shape (n, n) indexed [t, s]."""
    l1, l2 = lp.gens
    s = np.arange(n) / n
    S, T = np.meshgrid(s, s)
    return S * l1 + T * l2


def torus_grid(d: SpectralDataG0, lp: LatticePair, S: DivisorS, n: int) -> np.ndarray:
    """Rows (x, y, m, re_a, im_a, re_b, im_b) over an n x n fundamental grid."""
    z = fundamental_grid(lp, n).ravel()
    blocks = []
    for m, eta in enumerate(S.points):
        a, b = baker_arrays(d, z, eta)
        blocks.append(np.column_stack([z.real, z.imag, np.full(z.shape, m, dtype=float),
                                       a.real, a.imag, b.real, b.imag]))
    return np.vstack(blocks)


def monodromy_defects(d: SpectralDataG0, lp: LatticePair, S: DivisorS, zs) -> list[list[float]]:
    """max_z |psi_m(z + l_j) - mu(l_j)^-1 psi_m(z)| per divisor point m and generator j."""
    zs = np.asarray(zs, dtype=complex)
    out = []
    for eta in S.points:
        row = []
        a0, b0 = baker_arrays(d, zs, eta)
        for lam, mu in zip(lp.gens, lp.mu):
            a1, b1 = baker_arrays(d, zs + lam, eta)
            row.append(float(np.max(np.sqrt(np.abs(a1 - a0 / mu) ** 2 + np.abs(b1 - b0 / mu) ** 2))))
        out.append(row)
    return out


def multiplier_quaternion(d: SpectralDataG0, lp: LatticePair, Q: complex, lam: complex) -> Quaternion:
    """psi(0, Q)^-1 mu(lam) psi(lam, Q) as a quaternion."""
    if Q == 0 or not np.isfinite(complex(Q)):
        raise PunctureError("Q must avoid the punctures")
    mu = lp.mu_of(lam)
    return qmul(qinv(baker_g0(d, 0, Q)), baker_g0(d, lam, Q)) * complex(mu)


def multiplier_map(d: SpectralDataG0, lp: LatticePair, Q: complex, lam: complex) -> complex:
    """chi(lam, Q) = mu(lam) exp(lam eps Q - conj(lam eps) / Q)."""
    q = multiplier_quaternion(d, lp, Q, lam)
    if abs(q.b) > 1e-10 * max(1.0, abs(q.a)):
        raise ArithmeticError("multiplier quotient is not complex")
    return complex(q.a)


def multiplier_closed_form(d: SpectralDataG0, lp: LatticePair, Q: complex, lam: complex) -> complex:
    return lp.mu_of(lam) * cmath.exp(_exponent(d, complex(lam), complex(Q)))


def willmore_energy(d: SpectralDataG0, lp: LatticePair) -> float:
    """Integral of |U|^2 = |eps|^2 over one fundamental domain."""
    return abs(d.epsilon) ** 2 * lp.area


def t0_action(d: SpectralDataG0, t0: float) -> SpectralDataG0:
    """Data of exp(-i t0) psi exp(i t0): eps -> exp(2 i t0) eps.

    The Baker functions agree at equal zeta = eps * eta, so the new eta is
    exp(-2 i t0) times the old one.
    """
    return SpectralDataG0(cmath.exp(2j * t0) * d.epsilon)


def conjugate_by_phase(q: Quaternion, t0: float) -> Quaternion:
    """exp(-i t0) q exp(i t0) = a + j exp(2 i t0) b."""
    return Quaternion(q.a, q.b * cmath.exp(2j * t0))


def metadata(d: SpectralDataG0, lp: LatticePair, S: DivisorS) -> dict:
    meta = d.to_json()
    meta.update({
        "lattice": lp.to_json(),
        "mu": list(lp.mu),
        "S": S.to_json(),
        "degenerate_divisor": S.degenerate,
        "willmore": willmore_energy(d, lp),
    })
    return meta
