from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftedtr.curve import CurveSpec
from shiftedtr.exact import Rat
from shiftedtr.qcurve import (
    DiffOp,
    QCurveError,
    alpha_floor,
    build_quantum_operator,
    pretty_operator,
    resolvent,
    resolvent_contract,
    verify_quantum_curve,
    xi_one,
)

from conftest import get_state


def table_of(r, s, shifts=None, chi=3):
    return get_state(r, s, shifts, chi).export_table()


# -- closed forms ------------------------------------------------------------


@pytest.mark.parametrize("r", [2, 3, 4, 5])
def test_s1_closed_form(r):
    # h^r (d/dx x)^(r-1) d/dx - 1
    D = DiffOp.hbar_d(r)
    X = DiffOp.x_power(r, r)
    expected = DiffOp.identity(r)
    for _ in range(r - 1):
        expected = expected * D * X
    expected = expected * D - DiffOp.identity(r)
    assert build_quantum_operator(CurveSpec(r, 1), 4) == expected


@pytest.mark.parametrize("m", [-1, 0, 1])
def test_r3_s2_closed_form(m):
    # h^3 d^(2-m) x d^(m+1) - 1 for S_{1,1} = m
    r = 3
    D = DiffOp.hbar_d(r)
    X = DiffOp.x_power(r, r)
    expected = DiffOp.identity(r)
    for _ in range(2 - m):
        expected = expected * D
    expected = expected * X
    for _ in range(m + 1):
        expected = expected * D
    expected = expected - DiffOp.identity(r)
    curve = CurveSpec(3, 2, shifts={(1, 1): Rat(m)})
    assert build_quantum_operator(curve, 4) == expected


def test_pretty_operator_pin():
    c = CurveSpec(3, 2, shifts={(1, 1): Rat(-1)})
    assert pretty_operator(c, 4) == "h^3 d/dx d/dx x d/dx + h^3 d/dx d/dx - 1"


def test_unsupported_cases():
    with pytest.raises(QCurveError):
        build_quantum_operator(CurveSpec(2, 3), 4)  # s = r+1
    with pytest.raises(QCurveError):
        resolvent(table_of(2, 3, chi=2), 2)


# -- normal ordering --------------------------------------------------------------


def diff_ops(r):
    key = st.tuples(st.integers(-2, 2).map(lambda a: a * r), st.integers(0, 2))
    coeff = st.dictionaries(st.integers(0, 2), st.integers(-5, 5), min_size=1, max_size=2)
    return st.dictionaries(key, coeff, max_size=3).map(
        lambda t: DiffOp(r, {k: {h: Rat(v) for h, v in c.items()} for k, c in t.items()})
    )


@settings(max_examples=40, deadline=None)
@given(diff_ops(2), diff_ops(2), diff_ops(2))
def test_composition_associative(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


def test_commutator_pin():
    # [h d/dx, x] = h
    r = 3
    D, X = DiffOp.hbar_d(r), DiffOp.x_power(r, r)
    assert D * X - X * D == DiffOp.constant(r, 1, hpow=1)


@settings(max_examples=30, deadline=None)
@given(diff_ops(3))
def test_diffop_serialization_round_trip(op):
    assert DiffOp.from_jsonable(op.to_jsonable()) == op


def test_fractional_powers_serialize():
    op = DiffOp(3, {(2, 1): {0: Rat(5)}})  # x^(2/3) h d/dx
    doc = op.to_jsonable()
    assert doc["terms"][0]["a_num"] == 2 and doc["terms"][0]["a_den"] == 3
    assert DiffOp.from_jsonable(doc) == op


# -- annihilation -------------------------------------------------------------------


@pytest.mark.parametrize(
    "r,s,shifts",
    [
        (2, 1, {}),
        (2, 1, {(1, 1): Fraction(1), (2, 2): Fraction(3)}),
        (3, 2, {(1, 1): Fraction(-2)}),
        (3, 1, {(2, 1): Fraction(1), (3, 2): Fraction(1, 2)}),
    ],
)
def test_wave_function_annihilated(r, s, shifts):
    N = 3
    table = table_of(r, s, shifts, chi=N - 1)
    op = build_quantum_operator(CurveSpec(r, s, shifts=shifts), N)
    rep = verify_quantum_curve(op, resolvent(table, N), N)
    assert rep.ok, rep


def test_wrong_operator_reported_with_witness():
    table = table_of(2, 1, chi=2)
    op = build_quantum_operator(CurveSpec(2, 1), 3) + DiffOp.constant(2, Rat(1, 3), hpow=2)
    rep = verify_quantum_curve(op, resolvent(table, 3), 3)
    assert not rep.ok
    assert rep.witness[0] == 2  # first failing hbar order


def test_resolvent_leading_orders():
    F = resolvent(table_of(3, 2, chi=2), 2)
    assert F.coeff(0).coeffs == {-1: F.ctx.one()}  # y = z^(s-r)
    # hbar^1: -(r-1)/(2 r) z^(-r) from the b-subtracted integral
    assert F.coeff(1).coeff(-3) == F.ctx.scalar(Rat(-1, 3))


def test_resolvent_contract_vanishes():
    for (r, s, shifts) in [(2, 1, {}), (3, 2, {(1, 1): Fraction(5)}), (5, 2, {(1, 1): Fraction(1)})]:
        res = resolvent_contract(table_of(r, s, shifts, chi=2), 2)
        assert not res, (r, s, res)


def test_resolvent_requires_complete_table():
    from shiftedtr.tr import run_curve

    table = run_curve(CurveSpec(2, 1), 1).export_table()  # uncached, chi = 1 only
    with pytest.raises(QCurveError) as e:
        resolvent(table, 3)
    assert e.value.code == "incomplete-table"


def test_xi_one_matches_resolvent_structure():
    # independent assembly agrees with the first-slot assembly through the
    # contract identity; spot-check the hbar^0 coefficient directly
    xi = xi_one(table_of(2, 1, chi=2), 2)
    assert xi.coeff(0).coeffs == {-1: xi.coeff(0).ctx.one()}
