from __future__ import annotations

from fractions import Fraction

import pytest

from qkp import dressing
from qkp.diffalg import ONE, ZERO, DiffPoly, d_y, u
from qkp.psdo import PsdOp
from qkp.qcore import GaussianRational, Quaternion


@pytest.fixture(scope="module")
def dp3():
    return dressing.dress(dressing.lax_operator(-8), 3)


def test_residual_vanishes_at_moderate_depth(dp3):
    res = dressing.dressing_residual(dp3)
    assert res.is_zero()
    assert dp3.a[0] == (ONE, ZERO)


def test_vacuum_needs_no_dressing():
    dp = dressing.dress(dressing.vacuum_operator(-8), 3)
    assert all(a == (ZERO, ZERO) for a in dp.a[1:])
    assert dressing.dressing_residual(dp).is_zero()


@pytest.mark.parametrize("k, direction, coeff", [
    (1, "s", GaussianRational(0, 1)),
    (1, "t", GaussianRational(-1)),
    (2, "s", GaussianRational(1)),
    (2, "t", GaussianRational(0, 1)),
    (3, "s", GaussianRational(0, -1)),
    (3, "t", GaussianRational(1)),
])
def test_bare_operators(k, direction, coeff):
    P0 = dressing.bare_operator(k, direction)
    assert P0 == PsdOp.d(k, Quaternion(DiffPoly.const(coeff), ZERO))


def test_bare_operator_rejects_bad_input():
    with pytest.raises(ValueError):
        dressing.bare_operator(0, "s")
    with pytest.raises(ValueError):
        dressing.bare_operator(2, "x")


def test_t1_is_translation(dp3):
    flow = dressing.lax_rhs(dp3, dressing.flow_generator(dp3, 1, "t"), "t1")
    assert flow.velocities
    for g, v in flow.velocities.items():
        assert v == d_y(DiffPoly.gen(g))


def test_flow_leading_terms(dp3):
    s2 = dressing.flow_generator(dp3, 2, "s")
    t2 = dressing.flow_generator(dp3, 2, "t")
    assert max(s2.exponents()) == 2 and s2.coeff(2).a == ONE
    assert t2.coeff(2).a == DiffPoly.const(GaussianRational(0, 1))
    # the first-order part of t2 is the potential term U_0
    assert t2.coeff(1) == Quaternion(ZERO, DiffPoly.gen(u(0, 3)) + DiffPoly.gen(u(0, 4), GaussianRational(0, 1)))


def test_dirac_potential_is_half_of_U0(dp3):
    q = dressing.dirac_potential(dp3)
    half = GaussianRational(Fraction(1, 2))
    assert q.a.is_zero()
    assert q.b == DiffPoly.gen(u(0, 3), half) + DiffPoly.gen(u(0, 4), GaussianRational(0, 1) * half)


def test_shallow_depth_is_reported(dp3):
    with pytest.raises(dressing.DressingError):
        dressing.full_flow(dp3, 4, "s")


def test_antiderivative_symbols_have_no_flow(dp3):
    flow = dressing.lax_rhs(dp3, dressing.flow_generator(dp3, 2, "t"), "t2")
    with pytest.raises(dressing.DressingError):
        flow.velocity(dressing.Generator("A", 1, 1, 0))


def test_derivation_extends_by_leibniz(dp3):
    flow = dressing.lax_rhs(dp3, dressing.flow_generator(dp3, 2, "s"), "s2")
    p, q = DiffPoly.gen(u(0, 3)), DiffPoly.gen(u(1, 1), 3)
    assert flow.apply(p * q) == flow.apply(p) * q + p * flow.apply(q)
    assert flow.apply(d_y(p)) == d_y(flow.apply(p))
