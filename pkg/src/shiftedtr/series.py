"""Laurent forms in a local coordinate z, hbar-series, correlator storage.

A LaurentForm is a finite sum  sum_m c_m z^m (dz)^d  with c_m in Q(zeta_r)
and a fixed form degree d (d may be negative: that encodes division by
one-forms, which the recursion kernel needs).  All arithmetic is exact;
operations that would produce infinitely many terms (series inversion)
take an explicit exponent cap and the caller is responsible for choosing
it so that discarded terms never influence a reported coefficient.

HSeries is a truncated series in hbar whose coefficients are LaurentForms
(or anything supporting +, *, unary -).
"""

from __future__ import annotations

from .exact import Rat, RZERO, rat_to_str


class LaurentForm:
    """Finite Laurent polynomial times (dz)^formdeg, coefficients CycNum."""

    __slots__ = ("ctx", "coeffs", "formdeg")

    def __init__(self, ctx, coeffs=None, formdeg=0):
        self.ctx = ctx
        self.coeffs = {m: c for m, c in (coeffs or {}).items() if c}
        self.formdeg = formdeg

    @classmethod
    def _raw(cls, ctx, nonzero_coeffs, formdeg):
        # fast path for internal callers that guarantee no zero values
        f = cls.__new__(cls)
        f.ctx = ctx
        f.coeffs = nonzero_coeffs
        f.formdeg = formdeg
        return f

    @classmethod
    def monomial(cls, ctx, exp, coeff, formdeg=0):
        if not isinstance(coeff, type(ctx.one())):
            coeff = ctx.scalar(coeff)
        return cls(ctx, {exp: coeff}, formdeg)

    @classmethod
    def zero(cls, ctx, formdeg=0):
        return cls(ctx, {}, formdeg)

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        return (
            isinstance(other, LaurentForm)
            and self.formdeg == other.formdeg
            and self.coeffs == other.coeffs
        )

    def copy(self):
        return LaurentForm(self.ctx, dict(self.coeffs), self.formdeg)

    def __add__(self, other):
        if not isinstance(other, LaurentForm):
            return NotImplemented
        if self.formdeg != other.formdeg:
            if not self:
                return other.copy()
            if not other:
                return self.copy()
            raise ValueError("form degree mismatch: %d vs %d" % (self.formdeg, other.formdeg))
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            s = out.get(m)
            s = c if s is None else s + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return LaurentForm._raw(self.ctx, out, self.formdeg)

    def __neg__(self):
        return LaurentForm(self.ctx, {m: -c for m, c in self.coeffs.items()}, self.formdeg)

    def __sub__(self, other):
        return self + (-other)

    def mul(self, other, max_exp=None):
        """Product; drops exponents above max_exp when given."""
        out = {}
        get = out.get
        oitems = list(other.coeffs.items())
        for m1, c1 in self.coeffs.items():
            for m2, c2 in oitems:
                m = m1 + m2
                if max_exp is not None and m > max_exp:
                    continue
                p = c1 * c2
                s = get(m)
                s = p if s is None else s + p
                if s:
                    out[m] = s
                else:
                    del out[m]
        return LaurentForm._raw(self.ctx, out, self.formdeg + other.formdeg)

    def __mul__(self, other):
        if isinstance(other, LaurentForm):
            return self.mul(other)
        return self.scalar_mul(other)

    __rmul__ = __mul__

    def scalar_mul(self, a):
        if not isinstance(a, type(self.ctx.one())):
            a = self.ctx.scalar(a)
        return LaurentForm(
            self.ctx, {m: c * a for m, c in self.coeffs.items()}, self.formdeg
        )

    def min_exp(self):
        return min(self.coeffs) if self.coeffs else None

    def max_exp(self):
        return max(self.coeffs) if self.coeffs else None

    def coeff(self, m):
        return self.coeffs.get(m, self.ctx.zero())

    def truncate_above(self, max_exp):
        return LaurentForm(
            self.ctx,
            {m: c for m, c in self.coeffs.items() if m <= max_exp},
            self.formdeg,
        )

    def deriv(self):
        """d/dz acting on coefficients (formdeg unchanged)."""
        return LaurentForm(
            self.ctx,
            {m - 1: c * Rat(m) for m, c in self.coeffs.items() if m != 0},
            self.formdeg,
        )

    def d(self):
        """Exterior derivative of a function: f -> f'(z) dz."""
        if self.formdeg != 0:
            raise ValueError("d of a %d-form" % self.formdeg)
        out = self.deriv()
        return LaurentForm(self.ctx, out.coeffs, 1)

    def sheet_substitute(self, a):
        """f(z) (dz)^d  ->  f(theta^a z) (d theta^a z)^d, theta = zeta_r."""
        ctx = self.ctx
        d = self.formdeg
        return LaurentForm(
            ctx,
            {m: c * ctx.zeta(a * (m + d)) for m, c in self.coeffs.items()},
            d,
        )

    def residue_at_zero(self):
        """Residue at z = 0; only defined for one-forms."""
        if self.formdeg != 1:
            raise ValueError("residue of a %d-form" % self.formdeg)
        return self.coeff(-1)

    def invert(self, max_exp=None):
        """1/self as a Laurent series around 0, kept up to max_exp.

        Exact (no cap needed) when self is a single monomial.  Form degree
        is negated: 1/(f dz^d) = (1/f) dz^(-d).
        """
        if not self.coeffs:
            raise ZeroDivisionError("inverting zero series")
        m0 = self.min_exp()
        c0 = self.coeffs[m0]
        c0i = c0.inv()
        if len(self.coeffs) == 1:
            return LaurentForm(self.ctx, {-m0: c0i}, -self.formdeg)
        if max_exp is None:
            raise ValueError("inverting a non-monomial series needs an exponent cap")
        # self = c0 z^m0 (1 + u), val(u) >= 1
        u = {m - m0: c * c0i for m, c in self.coeffs.items() if m != m0}
        # geometric series sum (-u)^j, truncated at exponent max_exp + m0
        cap = max_exp + m0
        acc = {0: self.ctx.one()}
        term = {0: self.ctx.one()}
        while True:
            nxt = {}
            for m1, c1 in term.items():
                for m2, c2 in u.items():
                    m = m1 + m2
                    if m > cap:
                        continue
                    p = c1 * c2
                    s = nxt.get(m)
                    s = p if s is None else s + p
                    if s:
                        nxt[m] = s
                    else:
                        nxt.pop(m, None)
            term = {m: -c for m, c in nxt.items()}
            if not term:
                break
            for m, c in term.items():
                s = acc.get(m)
                s = c if s is None else s + c
                if s:
                    acc[m] = s
                else:
                    acc.pop(m, None)
        out = {m - m0: c * c0i for m, c in acc.items()}
        return LaurentForm(self.ctx, out, -self.formdeg)

    def map_coeffs(self, f):
        out = {}
        for m, c in self.coeffs.items():
            v = f(c)
            if v:
                out[m] = v
        return LaurentForm(self.ctx, out, self.formdeg)

    def __repr__(self):
        if not self.coeffs:
            body = "0"
        else:
            body = " + ".join(
                "(%r)*z^%d" % (c, m) for m, c in sorted(self.coeffs.items())
            )
        if self.formdeg:
            return "(%s) dz^%d" % (body, self.formdeg)
        return body


def invert_series(f, max_exp=None):
    return f.invert(max_exp)


class HSeries:
    """Truncated series in hbar: {hbar power -> coefficient}, kept to <= order.

    Powers may be negative.  Coefficients are anything with +, *, unary -.
    """

    __slots__ = ("terms", "order")

    def __init__(self, terms=None, order=None):
        if order is None:
            raise ValueError("HSeries needs an explicit truncation order")
        self.order = order
        self.terms = {k: v for k, v in (terms or {}).items() if k <= order and v}

    @classmethod
    def const(cls, value, order):
        return cls({0: value}, order)

    def coeff(self, k, default=None):
        if k in self.terms:
            return self.terms[k]
        return default

    def __add__(self, other):
        order = min(self.order, other.order)
        out = {k: v for k, v in self.terms.items() if k <= order}
        for k, v in other.terms.items():
            if k > order:
                continue
            if k in out:
                s = out[k] + v
                if s:
                    out[k] = s
                else:
                    del out[k]
            else:
                out[k] = v
        return HSeries(out, order)

    def __neg__(self):
        return HSeries({k: -v for k, v in self.terms.items()}, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, HSeries):
            return self.map(lambda v: v * other)
        order = min(self.order, other.order)
        out = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = k1 + k2
                if k > order:
                    continue
                p = v1 * v2
                if k in out:
                    s = out[k] + p
                    if s:
                        out[k] = s
                    else:
                        del out[k]
                elif p:
                    out[k] = p
        return HSeries(out, order)

    __rmul__ = __mul__

    def shift_power(self, d):
        """Multiply by hbar^d (d may be negative); order adjusts with it."""
        return HSeries({k + d: v for k, v in self.terms.items()}, self.order + d)

    def map(self, f):
        out = {}
        for k, v in self.terms.items():
            w = f(v)
            if w:
                out[k] = w
        return HSeries(out, self.order)

    def min_power(self):
        return min(self.terms) if self.terms else None

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, HSeries)
            and self.order == other.order
            and self.terms == other.terms
        )

    def __repr__(self):
        if not self.terms:
            return "O(hbar^%d)" % (self.order + 1)
        body = " + ".join(
            "hbar^%d*(%r)" % (k, v) for k, v in sorted(self.terms.items())
        )
        return "%s + O(hbar^%d)" % (body, self.order + 1)


class CorrelatorTable:
    """Sparse store of correlator coefficients F_{g,n}[k_1..k_n] (Rat values).

    Genus is stored doubled (two_g) so half-integer genus stays integral.
    Keys are canonicalized to nondecreasing order; symmetry of what is
    stored is the engine's responsibility (and is what verify_symmetry
    certifies).
    """

    def __init__(self, r, s, shifts=None, deformations=None, truncation=None):
        self.r = r
        self.s = s
        self.shifts = dict(shifts or {})  # (i, ell) -> Rat
        self.deformations = dict(deformations or {})  # description of f01/f12/f02 actually used
        self.truncation = truncation  # max 2g-2+n computed
        self._data = {}  # (two_g, n) -> {sorted key tuple: Rat}

    def set(self, two_g, n, keys, value):
        keys = tuple(sorted(keys))
        sect = self._data.setdefault((two_g, n), {})
        if value:
            sect[keys] = value
        else:
            sect.pop(keys, None)

    def get(self, two_g, n, keys):
        return self._data.get((two_g, n), {}).get(tuple(sorted(keys)), RZERO)

    def section(self, two_g, n):
        return self._data.get((two_g, n), {})

    def sectors(self):
        return sorted(self._data)

    def has_sector(self, two_g, n):
        return (two_g, n) in self._data

    def mark_computed(self, two_g, n):
        self._data.setdefault((two_g, n), {})

    def to_jsonable(self):
        entries = []
        for (two_g, n) in sorted(self._data):
            for keys in sorted(self._data[(two_g, n)]):
                entries.append(
                    {
                        "two_g": two_g,
                        "n": n,
                        "keys": list(keys),
                        "value": rat_to_str(self._data[(two_g, n)][keys]),
                    }
                )
        return {
            "header": {
                "r": self.r,
                "s": self.s,
                "shifts": [
                    {"i": i, "l": l, "value": rat_to_str(v)}
                    for (i, l), v in sorted(self.shifts.items())
                ],
                "deformations": self.deformations,
                "truncation": self.truncation,
                # computed sectors, including empty ones (vanishing F)
                "sectors": [list(s) for s in sorted(self._data)],
            },
            "entries": entries,
        }

    @classmethod
    def from_jsonable(cls, doc):
        from .exact import rat_from_str

        h = doc["header"]
        t = cls(
            h["r"],
            h["s"],
            {(e["i"], e["l"]): rat_from_str(e["value"]) for e in h["shifts"]},
            h.get("deformations") or {},
            h.get("truncation"),
        )
        for s in h.get("sectors") or []:
            t.mark_computed(s[0], s[1])
        for e in doc["entries"]:
            t.set(e["two_g"], e["n"], tuple(e["keys"]), rat_from_str(e["value"]))
        return t


def integrate_xi_from_infinity(ctx, k, f02):
    """int_infinity^z xi_{-k}, as a function of z (formdeg 0).

    xi_{-k} = z^(-k-1) dz + (1/k) sum_l F02[k,l] z^(l-1) dz.  The principal
    part integrates to -z^(-k)/k with vanishing boundary at infinity; the
    deformation tail is integrated term by term dropping the (divergent)
    boundary contribution at infinity.
    """
    out = {-k: ctx.scalar(Rat(-1, k))}
    for (kk, l), c in f02.items():
        if kk == k and c:
            prev = out.get(l, ctx.zero())
            v = prev + ctx.scalar(c * Rat(1, k * l))
            if v:
                out[l] = v
            else:
                out.pop(l, None)
    return LaurentForm(ctx, out, 0)


def b_subtracted_integral(ctx, r, f02):
    """Coinciding-point limit of int_infinity^{z'} (omega_{0,2}(., z) - dx dx'/(x-x')^2).

    The double-pole parts combine to the finite limit -(r-1)/(2z) dz coming
    from the second-order jet of x = z^r; the deformation part integrates to
    sum_{k,l} F02[k,l] z^(k+l-1)/l dz.
    """
    out = {-1: ctx.scalar(Rat(-(r - 1), 2))}
    for (k, l), c in f02.items():
        if c:
            m = k + l - 1
            prev = out.get(m, ctx.zero())
            v = prev + ctx.scalar(c * Rat(1, l))
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return LaurentForm(ctx, out, 1)
