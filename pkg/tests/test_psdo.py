from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qkp.diffalg import ONE, ZERO, DiffPoly, d_y, u
from qkp.psdo import PsdOp, WindowError, binom, commutator, compose, minus_part, plus_part, serialize
from qkp.qcore import GaussianRational, Quaternion

F = DiffPoly.gen(u(0, 3))
G = DiffPoly.gen(u(1, 1))


def op(d):
    return PsdOp({e: Quaternion(a, b) for e, (a, b) in d.items()})


def test_binomials_for_negative_exponents():
    assert binom(-1, 3) == -1
    assert binom(-2, 2) == 3
    assert binom(3, 4) == 0
    assert binom(Fraction(5), 2) == 10


def test_leibniz_for_first_order():
    D = PsdOp.d(1, Quaternion(ONE, ZERO))
    f = PsdOp.scalar(Quaternion(F, ZERO))
    got = compose(D, f)
    assert got == op({1: (F, ZERO), 0: (d_y(F), ZERO)})


def test_inverse_derivative():
    D = PsdOp.d(1, Quaternion(ONE, ZERO))
    Dinv = PsdOp({-1: Quaternion(ONE, ZERO)}, lo_valid=-6)
    f = PsdOp.scalar(Quaternion(F, ZERO))
    # D^-1 f D = f - f' D^-1 + f'' D^-2 - ...
    got = compose(compose(Dinv, f, -6), D, -5)
    assert got.coeff(0).a == F
    assert got.coeff(-1).a == -d_y(F)
    assert got.coeff(-2).a == d_y(F, 2)
    assert got.coeff(-4).a == d_y(F, 4)


def test_j_passes_through_derivatives():
    D = PsdOp.d(1, Quaternion(ONE, ZERO))
    j = PsdOp.scalar(Quaternion(ZERO, ONE))
    # D j = j D since j is constant
    assert compose(D, j) == compose(j, D)
    i = PsdOp.scalar(Quaternion(DiffPoly.const(GaussianRational(0, 1)), ZERO))
    assert compose(i, j) == -compose(j, i)


def test_window_is_enforced():
    A = PsdOp({1: Quaternion(ONE, ZERO), -1: Quaternion(F, ZERO)}, lo_valid=-3)
    with pytest.raises(WindowError):
        A.coeff(-4)
    B = compose(A, A)
    assert B.lo_valid == -2
    with pytest.raises(WindowError):
        plus_part(PsdOp({3: Quaternion(ONE, ZERO)}, lo_valid=1))


coeffs = st.sampled_from([ONE, F, G, F * G, DiffPoly.const(GaussianRational(1, 2))])
terms = st.dictionaries(st.integers(-2, 2), st.builds(Quaternion, coeffs, coeffs), min_size=1, max_size=3)


@settings(max_examples=25, deadline=None)
@given(terms, terms, terms)
def test_composition_is_associative(a, b, c):
    A, B, C = (PsdOp(t, lo_valid=-6) for t in (a, b, c))
    left = compose(compose(A, B), C)
    right = compose(A, compose(B, C))
    lo = max(left.lo_valid, right.lo_valid)
    assert left.with_lo(lo) == right.with_lo(lo)


@settings(max_examples=25, deadline=None)
@given(terms)
def test_plus_minus_split(a):
    A = PsdOp(a, lo_valid=-6)
    assert plus_part(A) + minus_part(A) == A


def test_commutator_of_derivative():
    D = PsdOp.d(1, Quaternion(ONE, ZERO))
    f = PsdOp.scalar(Quaternion(F, ZERO))
    assert commutator(D, f) == PsdOp.scalar(Quaternion(d_y(F), ZERO))


def test_serialisation():
    A = op({1: (DiffPoly.const(GaussianRational(0, 1)), ZERO), 0: (ZERO, F)})
    assert serialize(A) == "[1] (i) ; [0] j(u03)"
    assert serialize(PsdOp()) == "0"
