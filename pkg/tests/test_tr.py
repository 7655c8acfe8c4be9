from fractions import Fraction

import pytest

from shiftedtr.curve import CurveSpec, unchecked_curve
from shiftedtr.exact import Rat
from shiftedtr.tr import (
    MissingDependencyError,
    RecursionState,
    Report,
    compositions,
    run_curve,
    set_partitions,
    state_from_table,
)

from conftest import get_state


def as_fractions(state):
    out = {}
    for sec, vals in state.F.items():
        d = {
            k: Fraction(int(v.rational_of().numerator), int(v.rational_of().denominator))
            for k, v in vals.items()
            if v
        }
        if d:
            out[sec] = d
    return out


# -- combinatorial helpers -------------------------------------------------


def test_set_partitions_counts():
    # Bell numbers
    assert sum(1 for _ in set_partitions([1])) == 1
    assert sum(1 for _ in set_partitions([1, 2, 3])) == 5
    assert sum(1 for _ in set_partitions([1, 2, 3, 4])) == 15
    parts = list(set_partitions([1, 2]))
    assert sorted(map(sorted, parts)) == [[(1,), (2,)], [(1, 2)]]


def test_compositions():
    assert sorted(compositions(2, 2)) == [(0, 2), (1, 1), (2, 0)]
    assert list(compositions(0, 0)) == [()]
    assert sum(1 for _ in compositions(5, 3)) == 21


# -- pinned sector values (independently recomputed by the sympy oracle) ----


def test_airy_like_pins():
    f = as_fractions(get_state(2, 1, chi=2))
    assert f[(2, 1)] == {(1,): Fraction(-1, 16)}
    assert f[(2, 2)] == {(1, 1): Fraction(1, 32)}


def test_exceptional_pins():
    f = as_fractions(get_state(2, 3, chi=2))
    assert f[(0, 3)] == {(1, 1, 1): Fraction(-1, 2)}
    assert f[(2, 1)] == {(3,): Fraction(-1, 16)}
    assert f[(2, 2)] == {(3, 3): Fraction(3, 32), (1, 5): Fraction(5, 32)}
    assert f[(0, 4)] == {(1, 1, 1, 3): Fraction(3, 4)}


def test_bessel_like_pins():
    f = as_fractions(get_state(3, 2, chi=2))
    assert f[(2, 1)] == {(2,): Fraction(-1, 9)}
    assert f[(2, 2)] == {(2, 2): Fraction(2, 27)}


def test_shifted_pins():
    shifts = {(1, 1): Fraction(1), (2, 2): Fraction(3)}
    f = as_fractions(get_state(2, 1, shifts, chi=2))
    assert f[(2, 1)] == {(1,): Fraction(-45, 16)}
    assert f[(2, 2)] == {(1, 1): Fraction(45, 32)}


def test_half_genus_sectors_present_but_zero_without_shifts():
    st = get_state(3, 2, chi=2)
    assert st.F[(1, 2)] == {}
    assert (1, 2) in st.F


# -- verifiers ----------------------------------------------------------------


@pytest.mark.parametrize(
    "r,s,shifts",
    [(2, 1, {}), (3, 2, {(1, 1): Fraction(-2)}), (2, 3, {}), (3, 1, {(2, 1): Fraction(1), (3, 2): Fraction(1, 2)})],
)
def test_verifiers_pass(r, s, shifts):
    st = get_state(r, s, shifts, chi=3)
    assert st.verify_symmetry_and_identity().ok
    assert st.verify_loop_equations().ok


def test_deformed_curves_verify():
    c = CurveSpec(2, 1, f01={1: Rat(2), 2: Rat(1)}, f12={2: Rat(1, 2)}, f02={(1, 2): Rat(1)})
    st = run_curve(c, 2)
    assert st.verify_symmetry_and_identity().ok
    assert st.verify_loop_equations().ok


def test_loop_equations_catch_corruption():
    st = run_curve(CurveSpec(2, 3), 2)  # fresh state, the cache stays clean
    # corrupt a sector whose consumers lie inside the verified range
    key = (1, 5)
    st.F[(2, 2)][key] = st.F[(2, 2)][key] + st.ctx.one()
    for perm in (key, key[::-1]):
        st.G[(2, 2)][perm] = st.F[(2, 2)][key]
    rep = st.verify_loop_equations()
    assert not rep.ok
    assert any(f["location"][0].startswith(("i=", "E1")) for f in rep.failures)


def test_symmetry_catches_slot_asymmetry():
    st = run_curve(CurveSpec(2, 3), 2)
    st.G[(2, 2)][(1, 5)] = st.G[(2, 2)][(1, 5)] + st.ctx.one()
    rep = st.verify_symmetry_and_identity()
    assert not rep.ok
    assert rep.failures[0]["location"][0] == "symmetry"


def test_broken_shift_data_fails_symmetry(monkeypatch):
    monkeypatch.setenv("SHIFTEDTR_ALLOW_UNCHECKED", "1")
    bad = unchecked_curve(5, 3, shifts={(1, 1): Rat(1)})
    st = run_curve(bad, 3, strict=False)
    assert not st.verify_symmetry_and_identity().ok


# -- engine contracts -----------------------------------------------------------


def test_tr_step_rejects_unstable_targets():
    st = RecursionState(CurveSpec(2, 1))
    with pytest.raises(ValueError):
        st.tr_step(0, 1)  # omega_{0,2} is input data, not recursion output


def test_missing_dependency_detected():
    st = RecursionState(CurveSpec(2, 1))
    with pytest.raises(MissingDependencyError):
        st.tr_step(2, 1)  # needs omega_{1,1} = (2g=2, n=1) first


def test_run_is_idempotent_and_extendable():
    st = run_curve(CurveSpec(3, 2), 1)
    f1 = dict(st.F[(2, 1)])
    st.run(2)
    assert st.F[(2, 1)] == f1
    assert st.chi_done == 2
    assert (2, 2) in st.F


# -- export / import ---------------------------------------------------------------


def test_table_round_trip_preserves_everything():
    st = get_state(3, 2, {(1, 1): Fraction(5)}, chi=2)
    table = st.export_table()
    back = state_from_table(st.curve, table)
    assert back.chi_done == st.chi_done
    assert set(back.F) == set(st.F)
    for sec in st.F:
        assert back.F[sec] == st.F[sec]
    assert back.verify_loop_equations().ok
    assert back.verify_symmetry_and_identity().ok


def test_report_jsonable():
    rep = Report("demo")
    assert rep.ok and rep.to_jsonable()["status"] == "pass"
    rep.fail(("here",), {"z-exponent": -4})
    doc = rep.to_jsonable()
    assert doc["status"] == "fail" and len(doc["failures"]) == 1
