from fractions import Fraction

import pytest

from shiftedtr.curve import CurveError, CurveSpec, unchecked_curve
from shiftedtr.exact import Rat
from shiftedtr.series import LaurentForm

from conftest import CURVE_SAMPLES


# -- admissibility matrix -----------------------------------------------------


@pytest.mark.parametrize("r,s,shifts", CURVE_SAMPLES)
def test_samples_validate(r, s, shifts):
    c = CurveSpec(r, s, shifts=shifts)
    assert (c.r, c.s) == (r, s)
    assert c.is_exceptional == (s == r + 1)


@pytest.mark.parametrize(
    "r,s,code",
    [
        (1, 1, "invalid-r"),
        (0, 1, "invalid-r"),
        (3, 0, "invalid-s"),
        (3, 5, "invalid-s"),
        (7, 5, "inadmissible"),  # 7 mod 5 = 2, not +-1
        (5, 3, None),  # 5 mod 3 = 2 = -1: fine
        (4, 2, "inadmissible"),
        (8, 5, "inadmissible"),
    ],
)
def test_rs_validation(r, s, code):
    if code is None:
        CurveSpec(r, s)
        return
    with pytest.raises(CurveError) as e:
        CurveSpec(r, s)
    assert e.value.code == code


def test_admissibility_grid_matches_closed_form():
    # r = +-1 mod s (with s=1 and s=r+1 always admissible)
    for r in range(2, 10):
        for s in range(1, r + 2):
            ok = s == 1 or r % s in (1 % s, (-1) % s)
            if ok:
                CurveSpec(r, s)
            else:
                with pytest.raises(CurveError):
                    CurveSpec(r, s)


def test_shift_consistency():
    # r = 1 mod s allows only first-family shifts
    CurveSpec(3, 2, shifts={(1, 1): Rat(1)})
    with pytest.raises(CurveError) as e:
        CurveSpec(3, 2, shifts={(2, 1): Rat(1)})
    assert e.value.code == "inconsistent-shifts"
    with pytest.raises(CurveError):
        CurveSpec(4, 3, shifts={(2, 1): Rat(1)})
    # r = -1 mod s with s >= 3 allows none
    with pytest.raises(CurveError):
        CurveSpec(5, 3, shifts={(1, 1): Rat(1)})
    with pytest.raises(CurveError):
        CurveSpec(3, 4, shifts={(1, 1): Rat(1)})
    # s = 1 allows every family
    CurveSpec(3, 1, shifts={(1, 1): Rat(1), (2, 1): Rat(2), (3, 3): Rat(-1)})
    with pytest.raises(CurveError) as e:
        CurveSpec(3, 1, shifts={(4, 1): Rat(1)})
    assert e.value.code == "shift-index"
    with pytest.raises(CurveError):
        CurveSpec(3, 1, shifts={(1, 0): Rat(1)})


def test_deformation_validation():
    with pytest.raises(CurveError) as e:
        CurveSpec(2, 1, f01={1: 0})
    assert e.value.code == "degenerate-f01"
    with pytest.raises(CurveError) as e:
        CurveSpec(2, 3, f01={3: 2, 1: 1})  # index below min(s, r)
    assert e.value.code == "deformation-index"
    with pytest.raises(CurveError):
        CurveSpec(2, 1, f01={1: 2, 99: 1})
    with pytest.raises(CurveError):
        CurveSpec(2, 1, f02={(0, 1): Rat(1)})
    c = CurveSpec(2, 1, f02={(1, 2): Rat(5)})
    assert c.f02[(2, 1)] == Rat(5)  # symmetrized


def test_unchecked_is_gated(monkeypatch):
    monkeypatch.delenv("SHIFTEDTR_ALLOW_UNCHECKED", raising=False)
    with pytest.raises(CurveError) as e:
        unchecked_curve(7, 5)
    assert e.value.code == "unchecked-disabled"
    monkeypatch.setenv("SHIFTEDTR_ALLOW_UNCHECKED", "1")
    c = unchecked_curve(5, 3, shifts={(1, 1): Rat(1)})
    assert c.shifts == {(1, 1): Rat(1)}


# -- forms --------------------------------------------------------------------


def test_omega01_default():
    c = CurveSpec(3, 2)
    assert c.omega01() == LaurentForm.monomial(c.ctx, 1, Rat(3), 1)


def test_omega_half_shift_signs():
    c = CurveSpec(3, 1, shifts={(1, 1): Rat(2), (2, 1): Rat(3), (3, 1): Rat(5)})
    w = c.omega_half()
    # (-1)^(i-1) S_{i,1} z^(-s(i-1)-1) dz
    assert w.coeff(-1) == c.ctx.scalar(2)
    assert w.coeff(-2) == c.ctx.scalar(-3)
    assert w.coeff(-3) == c.ctx.scalar(5)


def test_xi_basis():
    c = CurveSpec(2, 1, f02={(1, 3): Rat(6)})
    assert c.xi_plus(2) == LaurentForm.monomial(c.ctx, 1, 1, 1)
    xi = c.xi_minus(1)
    assert xi.coeff(-2) == c.ctx.one()
    assert xi.coeff(2) == c.ctx.scalar(Rat(6, 1))  # (1/k) F02[k,l] z^(l-1)
    assert c.xi_minus(3).coeff(0) == c.ctx.scalar(Rat(6, 3))
    with pytest.raises(ValueError):
        c.xi_minus(0)


def test_kernel_denominator_inverts_product():
    c = CurveSpec(4, 3)
    sheets = (1, 3)
    prod = None
    for a in sheets:
        f = c.kernel_denominator_factor(a)
        prod = f if prod is None else prod * f
    inv = c.kernel_denominator(sheets, max_exp=7 - prod.min_exp())
    one = LaurentForm.monomial(c.ctx, 0, 1, 0)
    assert prod.mul(inv).truncate_above(7) == one
    with pytest.raises(ValueError):
        c.kernel_denominator_factor(0)
    with pytest.raises(ValueError):
        c.kernel_denominator((), 5)


# -- io -------------------------------------------------------------------------


def test_config_round_trip():
    c = CurveSpec(
        3,
        1,
        f01={1: Rat(3), 2: Rat(1, 2)},
        f12={1: Rat(-1)},
        f02={(1, 2): Rat(7, 3)},
        shifts={(2, 1): Fraction(1), (3, 2): Fraction(1, 2)},
    )
    doc = c.to_jsonable()
    back = CurveSpec.from_config(doc)
    assert back.to_jsonable() == doc
    assert back.f01 == c.f01 and back.f12 == c.f12
    assert back.f02 == c.f02 and back.shifts == c.shifts


def test_from_config_minimal():
    c = CurveSpec.from_config({"r": 2, "s": 3})
    assert c.f01 == {3: Rat(2)}
    assert not c.shifts
