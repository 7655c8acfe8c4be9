"""Spectral-curve data: validation, the xi basis, unstable correlators, kernels.

A curve is x = z^r together with a one-form omega_{0,1} whose undeformed
value is y dx = r z^{s-1} dz, a half-genus form omega_{1/2,1} carrying the
shift constants S_{i,1}, and a deformed bidifferential omega_{0,2}.  The
sheets over a point x != 0 are z, theta z, .., theta^(r-1) z with
theta = zeta_r; sheet labels are integers a in [0, r-1] meaning theta^a z.
"""

from __future__ import annotations

import math
import os

from .exact import CycContext, Rat, RZERO
from .series import LaurentForm

MAX_DEFORMATION_INDEX = 24

_UNCHECKED_ENV = "SHIFTEDTR_ALLOW_UNCHECKED"


class CurveError(ValueError):
    """Structured validation failure."""

    def __init__(self, code, message, location=None):
        super().__init__("%s: %s" % (code, message))
        self.code = code
        self.location = location


class CurveSpec:
    """Validated (r,s) curve with deformations and zero-mode shifts.

    f01: {k: Rat}, omega_{0,1} = sum_k f01[k] z^(k-1) dz  (default {s: r})
    f12: {k: Rat}, deformation part of omega_{1/2,1}
    f02: {(k,l): Rat} symmetric, deformation of the bidifferential
    shifts: {(i, ell): Rat}, the constants S_{i,ell}, i in [1..r], ell >= 1

    Shifts of non-zero modes are unrepresentable by construction: the only
    shift storage is indexed by (i, ell).
    """

    def __init__(self, r, s, f01=None, f12=None, f02=None, shifts=None, _unchecked=False):
        self.r = int(r)
        self.s = int(s)
        self.f01 = {int(k): Rat(v) for k, v in (f01 or {s: r}).items() if v}
        self.f12 = {int(k): Rat(v) for k, v in (f12 or {}).items() if v}
        self.f02 = {}
        for (k, l), v in (f02 or {}).items():
            if v:
                self.f02[(int(k), int(l))] = Rat(v)
                self.f02[(int(l), int(k))] = Rat(v)
        self.shifts = {(int(i), int(l)): Rat(v) for (i, l), v in (shifts or {}).items() if v}
        self.ctx = CycContext(self.r)
        self._xi_cache = {}
        if _unchecked:
            if os.environ.get(_UNCHECKED_ENV) != "1":
                raise CurveError(
                    "unchecked-disabled",
                    "unchecked curve construction requires %s=1" % _UNCHECKED_ENV,
                )
            self.is_exceptional = self.s == self.r + 1
        else:
            self.validate()

    # -- validation ---------------------------------------------------------

    def validate(self):
        r, s = self.r, self.s
        if r < 2:
            raise CurveError("invalid-r", "r must be >= 2, got %d" % r, ("r",))
        if not 1 <= s <= r + 1:
            raise CurveError("invalid-s", "s must lie in [1, r+1], got %d" % s, ("s",))
        if s > 1 and r % s not in (1 % s, (-1) % s):
            raise CurveError(
                "inadmissible",
                "(r,s)=(%d,%d) is not admissible: %d mod %d = %d not in {1, %d}"
                % (r, s, r, s, r % s, s - 1),
                ("r", "s"),
            )
        if math.gcd(r, s) != 1:
            # admissibility already forces this except for s=1
            raise CurveError("inadmissible", "gcd(r,s) must be 1", ("r", "s"))
        if self.f01.get(s, RZERO) == 0:
            raise CurveError("degenerate-f01", "F01[s] must be nonzero", ("f01", s))
        for k in list(self.f01) + list(self.f12):
            if not 1 <= k <= MAX_DEFORMATION_INDEX:
                raise CurveError(
                    "deformation-index",
                    "deformation index %d outside [1, %d]" % (k, MAX_DEFORMATION_INDEX),
                )
        for k in self.f01:
            if k < min(s, r):
                raise CurveError(
                    "deformation-index",
                    "F01 index %d below min(s, r) = %d" % (k, min(s, r)),
                    ("f01", k),
                )
        for (k, l) in self.f02:
            if not (1 <= k <= MAX_DEFORMATION_INDEX and 1 <= l <= MAX_DEFORMATION_INDEX):
                raise CurveError(
                    "deformation-index",
                    "f02 index (%d,%d) outside [1, %d]^2" % (k, l, MAX_DEFORMATION_INDEX),
                )
        for (i, l), v in self.shifts.items():
            if not (1 <= i <= r and l >= 1):
                raise CurveError(
                    "shift-index", "shift index (i=%d, l=%d) out of range" % (i, l)
                )
        # s-consistency: which S_{i,.} may be nonzero
        if s >= 2 and r % s == 1 % s:
            for (i, l), v in self.shifts.items():
                if i >= 2 and v:
                    raise CurveError(
                        "inconsistent-shifts",
                        "S_{%d,%d} != 0 but r = 1 mod s allows only i = 1" % (i, l),
                        ("shifts", (i, l)),
                    )
        if s >= 3 and r % s == (-1) % s and r % s != 1 % s:
            for (i, l), v in self.shifts.items():
                if v:
                    raise CurveError(
                        "inconsistent-shifts",
                        "S_{%d,%d} != 0 but r = -1 mod s (s >= 3) allows no shifts" % (i, l),
                        ("shifts", (i, l)),
                    )
        self.is_exceptional = s == r + 1
        return self

    # -- basic forms --------------------------------------------------------

    def omega01(self):
        """omega_{0,1} = sum_k F01[k] z^(k-1) dz."""
        ctx = self.ctx
        return LaurentForm(ctx, {k - 1: ctx.scalar(v) for k, v in self.f01.items()}, 1)

    def omega_half(self):
        """omega_{1/2,1} = sum_k F12[k] z^(k-1) dz + sum_i (-1)^(i-1) S_{i,1} dz/z^(s(i-1)+1)."""
        ctx = self.ctx
        out = {k - 1: ctx.scalar(v) for k, v in self.f12.items()}
        for i in range(1, self.r + 1):
            v = self.shifts.get((i, 1), RZERO)
            if v:
                m = -self.s * (i - 1) - 1
                c = out.get(m, ctx.zero()) + ctx.scalar(v if i % 2 == 1 else -v)
                if c:
                    out[m] = c
                else:
                    out.pop(m, None)
        return LaurentForm(ctx, out, 1)

    def xi_minus(self, k):
        """xi_{-k} = z^(-k-1) dz + (1/k) sum_l F02[k,l] z^(l-1) dz."""
        if k < 1:
            raise ValueError("xi_minus needs k >= 1")
        f = self._xi_cache.get(k)
        if f is None:
            ctx = self.ctx
            coeffs = {-k - 1: ctx.one()}
            for (kk, l), v in self.f02.items():
                if kk == k:
                    m = l - 1
                    c = coeffs.get(m, ctx.zero()) + ctx.scalar(v * Rat(1, k))
                    if c:
                        coeffs[m] = c
                    else:
                        coeffs.pop(m, None)
            f = LaurentForm(ctx, coeffs, 1)
            self._xi_cache[k] = f
        return f

    def xi_plus(self, k):
        if k < 1:
            raise ValueError("xi_plus needs k >= 1")
        return LaurentForm.monomial(self.ctx, k - 1, self.ctx.one(), 1)

    def shift_hseries(self, i, order):
        """S_i^hbar = sum_{ell=1..order} hbar^ell S_{i,ell} as {ell: Rat}."""
        return {
            l: v for (j, l), v in self.shifts.items() if j == i and 1 <= l <= order and v
        }

    def max_shift_order(self):
        return max((l for (_, l) in self.shifts), default=0)

    # -- kernel pieces ------------------------------------------------------

    def kernel_denominator_factor(self, a):
        """omega_{0,1}(theta^a z) - omega_{0,1}(z) for sheet a in [1, r-1]."""
        if not 1 <= a % self.r <= self.r - 1 or a % self.r == 0:
            raise ValueError("sheet label must be a nontrivial sheet")
        w = self.omega01()
        return w.sheet_substitute(a) - w

    def kernel_denominator(self, sheets, max_exp):
        """Series inverse of prod_{a in sheets}(omega01(theta^a z) - omega01(z)).

        Exact up to exponent max_exp; formdeg -len(sheets).
        """
        if not sheets:
            raise ValueError("recursion kernel needs a nonempty sheet set")
        prod = None
        for a in sheets:
            f = self.kernel_denominator_factor(a)
            prod = f if prod is None else prod * f
        return prod.invert(max_exp)

    # -- io -----------------------------------------------------------------

    def to_jsonable(self):
        from .exact import rat_to_str

        return {
            "r": self.r,
            "s": self.s,
            "f01": {str(k): rat_to_str(v) for k, v in sorted(self.f01.items())},
            "f12": {str(k): rat_to_str(v) for k, v in sorted(self.f12.items())},
            "f02": [
                {"k": k, "l": l, "value": rat_to_str(v)}
                for (k, l), v in sorted(self.f02.items())
                if k <= l
            ],
            "shifts": [
                {"i": i, "l": l, "value": rat_to_str(v)}
                for (i, l), v in sorted(self.shifts.items())
            ],
        }

    @classmethod
    def from_config(cls, doc, _unchecked=False):
        from .exact import rat_from_str

        def ratmap(d):
            return {int(k): rat_from_str(str(v)) for k, v in (d or {}).items()}

        f02 = {}
        for e in doc.get("f02") or []:
            f02[(int(e["k"]), int(e["l"]))] = rat_from_str(str(e["value"]))
        shifts = {}
        for e in doc.get("shifts") or []:
            shifts[(int(e["i"]), int(e["l"]))] = rat_from_str(str(e["value"]))
        return cls(
            doc["r"],
            doc["s"],
            ratmap(doc.get("f01")) or None,
            ratmap(doc.get("f12")),
            f02,
            shifts,
            _unchecked=_unchecked,
        )

    def __repr__(self):
        return "CurveSpec(r=%d, s=%d, shifts=%r)" % (self.r, self.s, self.shifts)


def unchecked_curve(r, s, f01=None, f12=None, f02=None, shifts=None):
    """Test-only constructor that skips validation.

    Refuses to run unless SHIFTEDTR_ALLOW_UNCHECKED=1 is set; release
    entry points never set it.
    """
    return CurveSpec(r, s, f01, f12, f02, shifts, _unchecked=True)
