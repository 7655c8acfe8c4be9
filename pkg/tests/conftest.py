"""Shared fixtures: recursion states are expensive, so they are computed
once per (curve, chi) and shared across test modules."""

from fractions import Fraction

import pytest

from shiftedtr.curve import CurveSpec
from shiftedtr.tr import run_curve

_STATE_CACHE = {}


def _canon_shifts(shifts):
    return tuple(sorted((i, l, Fraction(v)) for (i, l), v in (shifts or {}).items()))


def get_state(r, s, shifts=None, chi=3):
    """Cached RecursionState for an undeformed curve, computed to >= chi."""
    key = (r, s, _canon_shifts(shifts))
    state = _STATE_CACHE.get(key)
    if state is None or state.chi_done < chi:
        state = run_curve(CurveSpec(r, s, shifts=shifts), chi)
        _STATE_CACHE[key] = state
    return state


@pytest.fixture
def state_of():
    return get_state


# curve / shift-set samples used by both the unit tests and the acceptance
# gate: every admissible s-consistent pattern, including all-zero shifts
CURVE_SAMPLES = [
    (2, 1, {}),
    (2, 1, {(1, 1): Fraction(1), (2, 2): Fraction(3)}),
    (2, 1, {(2, 1): Fraction(-1), (1, 1): Fraction(2)}),
    (3, 1, {}),
    (3, 1, {(2, 1): Fraction(1), (3, 2): Fraction(1, 2)}),
    (3, 1, {(1, 1): Fraction(-1), (2, 2): Fraction(2)}),
    (2, 3, {}),
    (3, 2, {}),
    (3, 2, {(1, 1): Fraction(-2)}),
    (3, 2, {(1, 1): Fraction(5)}),
    (4, 3, {}),
    (4, 3, {(1, 1): Fraction(2)}),
    (4, 3, {(1, 1): Fraction(-1)}),
    (3, 4, {}),
    (5, 2, {}),
    (5, 2, {(1, 1): Fraction(1)}),
    (5, 2, {(1, 1): Fraction(-3)}),
]
