"""Multiplier spectrum of the constant-potential Dirac operator D = d/dzbar + (pi/2) beta0 j.

Writing a solution as mu^-1 (phi1 + j phi2) chi with chi = exp(pi i (xi z + eta zbar))
and Fourier-expanding the periodic phi's reduces D psi = 0 to the 2x2 systems

    [ alpha + eta - beta0/2        i beta0/2                ] [phi1]
    [ -i conj(beta0)/2             conj(alpha) + xi - conj(beta0)/2 ] [phi2] = 0,

one per alpha in the dual lattice.  Their determinants F_alpha cut out the
log-spectrum as a union of rational curves C_alpha.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geomzero import DEFAULT_TOL, LatticeError, PunctureError, dual_basis_of, inner
from .qcore import GaussianRational, Quaternion

HALF = Fraction(1, 2)


def _is_exact(*xs) -> bool:
    return all(isinstance(x, (int, Fraction, GaussianRational)) for x in xs)


def _conj(x):
    if isinstance(x, (int, Fraction)):
        return x
    return x.conjugate()


def _exact_dual_basis(l1: GaussianRational, l2: GaussianRational):
    # <b, l> = Re(b conj l) = bx lx + by ly; invert the 2x2 rational matrix
    a, b, c, d = l1.re, l1.im, l2.re, l2.im
    det = a * d - b * c
    if det == 0:
        raise LatticeError("lattice generators are colinear over R")
    # rows of inverse give the dual vectors
    return GaussianRational(d / det, -c / det), GaussianRational(-b / det, a / det)


def _pair_exact(b, lam) -> Fraction:
    b, lam = GaussianRational.coerce(b), GaussianRational.coerce(lam)
    return b.re * lam.re + b.im * lam.im


@dataclass(frozen=True)
class HSLData:
    lattice: tuple
    beta0: object
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        l1, l2 = self.lattice
        if _is_exact(l1, l2, self.beta0):
            l1, l2 = GaussianRational.coerce(l1), GaussianRational.coerce(l2)
            b0 = GaussianRational.coerce(self.beta0)
            if b0.is_zero():
                raise ValueError("beta0 must be non-zero")
            duals = _exact_dual_basis(l1, l2)
            for lam in (l1, l2):
                if _pair_exact(b0, lam).denominator != 1:
                    raise LatticeError("beta0 is not in the dual lattice")
            exact = True
        else:
            l1, l2, b0 = complex(l1), complex(l2), complex(self.beta0)
            if b0 == 0:
                raise ValueError("beta0 must be non-zero")
            duals = dual_basis_of(l1, l2)
            for lam in (l1, l2):
                v = inner(b0, lam)
                if abs(v - round(v)) > self.tol:
                    raise LatticeError("beta0 is not in the dual lattice")
            exact = False
        object.__setattr__(self, "lattice", (l1, l2))
        object.__setattr__(self, "beta0", b0)
        object.__setattr__(self, "_duals", duals)
        object.__setattr__(self, "exact", exact)

    @property
    def dual_basis(self) -> tuple:
        return self._duals

    def alpha(self, m: int, n: int):
        b1, b2 = self._duals
        return b1 * m + b2 * n

    def dual_box(self, box: int):
        """(m, n, alpha) for |m|, |n| <= box."""
        for m in range(-box, box + 1):
            for n in range(-box, box + 1):
                yield m, n, self.alpha(m, n)

    def to_json(self) -> dict:
        b = complex(self.beta0)
        return {"beta0": [b.real, b.imag],
                "lattice": [[complex(x).real, complex(x).imag] for x in self.lattice]}


def F_alpha(h: HSLData, alpha, eta, xi):
    """(alpha + eta - beta0/2)(conj(alpha) + xi - conj(beta0)/2) - |beta0|^2/4."""
    b0 = h.beta0
    if _is_exact(alpha, eta, xi) and h.exact:
        return ((b0 * -HALF + alpha + eta) * (_conj(b0) * -HALF + _conj(alpha) + xi)
                - b0.norm() / 4)
    b0 = complex(b0)
    alpha = complex(alpha)
    return (alpha + eta - b0 / 2) * (np.conj(alpha) + xi - np.conj(b0) / 2) - abs(b0) ** 2 / 4


class BiPoly:
    """Exact polynomial in (eta, xi) over Q(i)."""

    __slots__ = ("c",)

    def __init__(self, c: dict | None = None):
        self.c = {k: GaussianRational.coerce(v) for k, v in (c or {}).items()
                  if not GaussianRational.coerce(v).is_zero()}

    @classmethod
    def const(cls, v) -> "BiPoly":
        return cls({(0, 0): v})

    @classmethod
    def eta(cls) -> "BiPoly":
        return cls({(1, 0): 1})

    @classmethod
    def xi(cls) -> "BiPoly":
        return cls({(0, 1): 1})

    def __add__(self, other):
        o = other if isinstance(other, BiPoly) else BiPoly.const(other)
        c = dict(self.c)
        for k, v in o.c.items():
            c[k] = c.get(k, GaussianRational(0)) + v
        return BiPoly(c)

    __radd__ = __add__

    def __neg__(self):
        return BiPoly({k: -v for k, v in self.c.items()})

    def __sub__(self, other):
        return self + (-(other if isinstance(other, BiPoly) else BiPoly.const(other)))

    def __mul__(self, other):
        o = other if isinstance(other, BiPoly) else BiPoly.const(other)
        c: dict = {}
        for (i1, j1), v1 in self.c.items():
            for (i2, j2), v2 in o.c.items():
                k = (i1 + i2, j1 + j2)
                c[k] = c.get(k, GaussianRational(0)) + v1 * v2
        return BiPoly(c)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, BiPoly):
            return NotImplemented
        return (self - other).c == {}

    def __hash__(self):
        return hash(tuple(sorted(self.c.items())))

    def __call__(self, eta, xi):
        out = GaussianRational(0) if _is_exact(eta, xi) else 0j
        for (i, j), v in self.c.items():
            out = out + (v if isinstance(out, GaussianRational) else complex(v)) * eta ** i * xi ** j
        return out

    def __repr__(self):
        terms = [f"({v})*eta^{i}*xi^{j}" for (i, j), v in sorted(self.c.items())]
        return " + ".join(terms) if terms else "0"


def hsl_alpha_matrix(h: HSLData, alpha) -> list[list[BiPoly]]:
    """The 2x2 matrix whose kernel carries the alpha-th Fourier coefficients."""
    if not h.exact:
        raise TypeError("exact matrix needs Gaussian-rational data")
    b0 = h.beta0
    a = GaussianRational.coerce(alpha)
    i = GaussianRational(0, 1)
    return [
        [BiPoly.eta() + (a - b0 * HALF), BiPoly.const(i * b0 * HALF)],
        [BiPoly.const(-i * b0.conjugate() * HALF), BiPoly.xi() + (a.conjugate() - b0.conjugate() * HALF)],
    ]


def det2(m) -> BiPoly:
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def F_alpha_poly(h: HSLData, alpha) -> BiPoly:
    b0 = h.beta0
    a = GaussianRational.coerce(alpha)
    return ((BiPoly.eta() + (a - b0 * HALF)) * (BiPoly.xi() + (a.conjugate() - b0.conjugate() * HALF))
            - BiPoly.const(b0.norm() / 4))


def component_eta(h: HSLData, alpha, xi):
    """eta on C_alpha as a function of xi (undefined where conj(alpha) + xi = conj(beta0)/2)."""
    b0 = complex(h.beta0)
    alpha = complex(alpha)
    return b0 / 2 - alpha + (abs(b0) ** 2 / 4) / (np.conj(alpha) + xi - np.conj(b0) / 2)


def component_xi(h: HSLData, alpha, eta):
    b0 = complex(h.beta0)
    alpha = complex(alpha)
    return np.conj(b0) / 2 - np.conj(alpha) + (abs(b0) ** 2 / 4) / (alpha + eta - b0 / 2)


class Singularity(enum.Enum):
    DOUBLE_POINT = "double"
    CUSP = "cusp"
    NONE = "none"


def identification_quadratic(h: HSLData, alpha):
    """Coefficients (a, b, c) of (alpha/conj(alpha)) Z^2 + alpha Z + |beta0|^2/4."""
    b0 = h.beta0
    if h.exact and _is_exact(alpha):
        a = GaussianRational.coerce(alpha)
        return a / a.conjugate(), a, GaussianRational(b0.norm() / 4)
    a = complex(alpha)
    return a / a.conjugate(), a, abs(complex(b0)) ** 2 / 4


def classify_singularity(h: HSLData, alpha) -> Singularity:
    """Type of the identification of C_0 with C_alpha, from the quadratic discriminant."""
    if (GaussianRational.coerce(alpha).is_zero() if _is_exact(alpha) else alpha == 0):
        raise ValueError("alpha must be non-zero")
    a, b, c = identification_quadratic(h, alpha)
    if (c == 0) if not isinstance(c, GaussianRational) else c.is_zero():
        return Singularity.NONE
    disc = b * b - a * c * 4
    if isinstance(disc, GaussianRational):
        zero = disc.is_zero()
    else:
        zero = abs(disc) <= h.tol * max(1.0, abs(b) ** 2)
    return Singularity.CUSP if zero else Singularity.DOUBLE_POINT


def identification_roots(h: HSLData, alpha) -> list:
    """Roots Z = xi - conj(beta0)/2; the cusp root -conj(alpha)/2 is returned exactly."""
    a, b, c = identification_quadratic(h, alpha)
    kind = classify_singularity(h, alpha)
    if kind is Singularity.CUSP:
        if isinstance(b, GaussianRational):
            return [b.conjugate() * -HALF]
        return [-np.conj(complex(alpha)) / 2]
    a, b, c = complex(a), complex(b), complex(c)
    s = cmath.sqrt(b * b - 4 * a * c)
    return [(-b + s) / (2 * a), (-b - s) / (2 * a)]


def singular_set(h: HSLData, box: int = 16) -> list:
    """alpha in Lambda* with |alpha - beta0/2| = |beta0/2|: these are identified with (0, 0)."""
    out = []
    for m, n, a in h.dual_box(box):
        if h.exact:
            if (a - h.beta0 * HALF).norm() == h.beta0.norm() / 4:
                out.append(a)
        elif abs(abs(a - h.beta0 / 2) - abs(h.beta0) / 2) <= h.tol * abs(h.beta0):
            out.append(a)
    return out


def cusp_set(h: HSLData, box: int = 16) -> list:
    """Non-zero alpha in Lambda* on the circle |alpha| = |beta0|."""
    out = []
    for m, n, a in h.dual_box(box):
        if h.exact:
            if a.norm() == h.beta0.norm() and not a.is_zero():
                out.append(a)
        elif abs(abs(a) - abs(h.beta0)) <= h.tol * abs(h.beta0):
            out.append(a)
    return out


def from_divisor_alpha(alpha, beta0):
    """Map a genus-zero divisor label (|alpha| = |beta0|) to the singular-set label here."""
    return (alpha + beta0) * HALF if _is_exact(alpha, beta0) else (complex(alpha) + complex(beta0)) / 2


def to_divisor_alpha(alpha, beta0):
    return alpha * 2 - beta0 if _is_exact(alpha, beta0) else 2 * complex(alpha) - complex(beta0)


def hsl_multiplier_arrays(h: HSLData, z, zeta):
    """(a, b) of (1 - j (pi conj(beta0)/2) / zeta) exp(-pi^2 |beta0|^2 zbar / (4 zeta)) e^(z zeta)."""
    zeta = np.asarray(zeta, dtype=complex)
    if np.any(zeta == 0):
        raise PunctureError("zeta = 0")
    z = np.asarray(z, dtype=complex)
    b0 = complex(h.beta0)
    a = np.exp(z * zeta - math.pi ** 2 * abs(b0) ** 2 * np.conj(z) / (4 * zeta))
    return a, -(math.pi * np.conj(b0) / 2) / zeta * a


def hsl_multiplier_derivatives(h: HSLData, z, zeta):
    a, b = hsl_multiplier_arrays(h, z, zeta)
    b0 = complex(h.beta0)
    zeta = np.asarray(zeta, dtype=complex)
    return a, b, -math.pi ** 2 * abs(b0) ** 2 / (4 * zeta) * a, zeta * b


def hsl_multiplier_baker(h: HSLData, z: complex, zeta: complex) -> Quaternion:
    a, b = hsl_multiplier_arrays(h, complex(z), complex(zeta))
    return Quaternion(complex(a), complex(b))


def dirac_u(h: HSLData) -> complex:
    """u with (pi/2) beta0 j = j u."""
    return math.pi * complex(h.beta0).conjugate() / 2


def log_spectrum_point(chis, gens) -> tuple[complex, complex]:
    """(eta, xi) with pi i (xi l + eta conj(l)) = Log chi(l) for both generators.

    Principal logarithms; the result is determined up to (eta, xi) -> (eta + a, xi + conj(a)),
    a in the dual lattice.
    """
    (c1, c2), (l1, l2) = chis, gens
    M = np.array([[l1, np.conj(l1)], [l2, np.conj(l2)]], dtype=complex)
    rhs = np.array([cmath.log(c1), cmath.log(c2)]) / (math.pi * 1j)
    xi, eta = np.linalg.solve(M, rhs)
    return complex(eta), complex(xi)


def min_F_over_box(h: HSLData, eta: complex, xi: complex, box: int = 16) -> tuple[float, object]:
    best, arg = math.inf, None
    for m, n, a in h.dual_box(box):
        v = abs(F_alpha(h, complex(a) if h.exact else a, eta, xi))
        if v < best:
            best, arg = v, a
    return best, arg


def _numeric_matrices(h: HSLData, alpha: complex, eta: np.ndarray, xi: np.ndarray) -> np.ndarray:
    b0 = complex(h.beta0)
    A = np.empty(eta.shape + (2, 2), dtype=complex)
    A[..., 0, 0] = alpha + eta - b0 / 2
    A[..., 0, 1] = 1j * b0 / 2
    A[..., 1, 0] = -1j * np.conj(b0) / 2
    A[..., 1, 1] = np.conj(alpha) + xi - np.conj(b0) / 2
    return A


def numeric_spectrum(h: HSLData, eta_grid: np.ndarray, cutoff: int, tol: float = DEFAULT_TOL) -> dict:
    """Scan C_alpha for alpha in the coefficient box over a grid of eta values.

    For each (eta, alpha) the determinant of the 2x2 system, which is affine in
    xi, is sampled at xi = 0 and xi = 1 with a generic determinant routine and
    its root xi* located.  The point is flagged when |det| at xi* is below
    tol times the local scale.  Returns the cloud as an array with columns
    (eta_re, eta_im, xi_re, xi_im, m, n, det_abs, flagged) and the largest
    distance of a flagged point from the analytic component.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    eta = np.asarray(eta_grid, dtype=complex).ravel()
    rows, worst = [], 0.0
    zero = np.zeros_like(eta)
    for m, n, a in h.dual_box(cutoff):
        a = complex(a)
        p0 = np.linalg.det(_numeric_matrices(h, a, eta, zero))
        p1 = np.linalg.det(_numeric_matrices(h, a, eta, zero + 1))
        slope = p1 - p0
        ok = np.abs(slope) > 1e-300
        xi = np.where(ok, -p0 / np.where(ok, slope, 1), np.nan)
        d = np.abs(np.linalg.det(_numeric_matrices(h, a, eta, np.nan_to_num(xi))))
        scale = np.abs(slope) * (1 + np.abs(xi)) + np.abs(p0)
        flag = ok & (d <= tol * np.where(ok, scale, 1))
        if np.any(flag):
            ref = component_xi(h, a, eta[flag])
            worst = max(worst, float(np.max(np.abs(ref - xi[flag]))))
        rows.append(np.column_stack([eta.real, eta.imag, np.real(xi), np.imag(xi),
                                     np.full(eta.shape, m), np.full(eta.shape, n), d, flag]))
    return {"cloud": np.vstack(rows), "max_component_distance": worst}


def components_json(h: HSLData, box: int) -> list:
    out = []
    for m, n, a in h.dual_box(box):
        if (a.is_zero() if h.exact else a == 0):
            continue
        c = complex(a)
        out.append({"alpha": [c.real, c.imag], "type": classify_singularity(h, a).value})
    return out
