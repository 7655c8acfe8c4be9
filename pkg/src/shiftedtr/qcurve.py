"""Wave function log-derivative and the order-r quantization of x = z^r.

The wave function psi is never built directly (its shift integrals produce
logarithms).  Everything runs on the resolvent F = hbar d/dx log psi, which
is a Laurent polynomial in z at every hbar order, and on the quotient
Q = (op psi)/psi, computed with the pair trick

    (hbar d/dx)(A psi) = (hbar dA/dx + A F) psi.

Differential operators are kept normal-ordered, all x-powers to the left of
all derivatives; x^a with a rational (denominator dividing r) is realized as
the integer z-power z^(a r).
"""

from __future__ import annotations

import math

from .exact import CycContext, Rat, RONE, RZERO, rat_from_str, rat_to_str
from .series import HSeries, LaurentForm, b_subtracted_integral


class QCurveError(ValueError):
    def __init__(self, code, message):
        super().__init__("%s: %s" % (code, message))
        self.code = code


def alpha_floor(r, s, i):
    """floor(i (r-s) / r)."""
    return (i * (r - s)) // r


def _check_rs(r, s):
    if s == r + 1:
        raise QCurveError("unsupported-case", "s = r+1 curves are not quantized here")
    if not 1 <= s <= r - 1:
        raise QCurveError("unsupported-case", "need 1 <= s <= r-1, got (r,s)=(%d,%d)" % (r, s))


# -- resolvent ----------------------------------------------------------------


class Resolvent:
    """F(z) = hbar d/dx log psi, an hbar-series of z-Laurent polynomials.

    The hbar^0 coefficient is y(z) = z^(s-r).
    """

    __slots__ = ("r", "s", "shifts", "series", "ctx")

    def __init__(self, r, s, shifts, series, ctx):
        self.r = r
        self.s = s
        self.shifts = dict(shifts)
        self.series = series
        self.ctx = ctx

    @property
    def order(self):
        return self.series.order

    def coeff(self, k):
        c = self.series.coeff(k)
        return c if c is not None else LaurentForm.zero(self.ctx)


def _spectator_terms(table, N, first_slot_factor):
    """Accumulate {hbar power: {z exp: Rat}} from the stable table sectors.

    omega_{g,n+1}(z, z_[n]) with every spectator slot integrated from
    infinity (int xi_{-k} = -z^(-k)/k) and all spectators set to z, divided
    by dx = r z^(r-1) dz.  first_slot_factor(k0) scales the slot carrying
    the plain xi_{-k0}(z); the resolvent uses 1, the xi^1 assembly uses the
    nontrivial-sheet sum of xi_{-k0}(theta^a z)/xi_{-k0}(z).
    """
    r = table.r
    out = {}
    for (two_g, np) in table.sectors():
        hpow = two_g + np - 1
        if hpow > N:
            continue
        bucket = out.setdefault(hpow, {})
        for keys, val in table.section(two_g, np).items():
            for k0 in set(keys):
                f0 = first_slot_factor(k0)
                if not f0:
                    continue
                rest = list(keys)
                rest.remove(k0)
                # ordered spectator arrangements / n! = 1 / prod(mult!)
                w = RONE
                for v in set(rest):
                    w /= Rat(math.factorial(rest.count(v)))
                coeff = val * f0 * w / Rat(r)
                exp = -k0 - r
                for k in rest:
                    coeff *= Rat(-1, k)
                    exp -= k
                prev = bucket.get(exp, RZERO) + coeff
                if prev:
                    bucket[exp] = prev
                else:
                    bucket.pop(exp, None)
    return out


def _to_hseries(ctx, buckets, N):
    terms = {}
    for hpow, bucket in buckets.items():
        lf = LaurentForm(ctx, {m: ctx.scalar(c) for m, c in bucket.items() if c}, 0)
        if lf:
            terms[hpow] = lf
    return HSeries(terms, N)


def _require_complete(table, N):
    for chi in range(1, N):
        for np in range(1, chi + 3):
            two_g = chi + 2 - np
            if two_g < 0:
                continue
            if not table.has_sector(two_g, np):
                raise QCurveError(
                    "incomplete-table",
                    "sector (2g=%d, n=%d) at chi=%d missing; resolvent to order %d "
                    "needs the table through chi=%d" % (two_g, np, chi, N, N - 1),
                )


def resolvent(table, N):
    """Assemble F = hbar d/dx log psi through hbar^N from a correlator table.

    Contributions: z^(s-r) from omega_{0,1}; the coinciding-point limit of
    the double-pole-subtracted omega_{0,2} integral and the S_{i,1} terms of
    omega_{1/2,1} at hbar^1; each stable sector (g, n+1) at hbar^(2g+n) with
    the n spectator slots integrated from infinity and merged to z.
    """
    r, s = table.r, table.s
    _check_rs(r, s)
    d = table.deformations or {}
    if (
        d.get("f12")
        or d.get("f02")
        or (d.get("f01") and d["f01"] != {str(s): str(r)})
    ):
        raise QCurveError("unsupported-case", "resolvent needs an undeformed curve")
    _require_complete(table, N)
    ctx = CycContext(r)
    buckets = _spectator_terms(table, N, lambda k0: RONE)
    buckets.setdefault(0, {})[s - r] = buckets.get(0, {}).get(s - r, RZERO) + RONE
    h1 = buckets.setdefault(1, {})
    # b-subtracted (0,2) integral at coinciding points, over dx
    bsub = b_subtracted_integral(ctx, r, {})
    for m, c in bsub.coeffs.items():
        q = c.rational_of() / Rat(r)
        h1[m + 1 - r] = h1.get(m + 1 - r, RZERO) + q
    for (i, l), v in table.shifts.items():
        if l == 1 and v:
            m = -s * (i - 1) - r
            q = (v if i % 2 == 1 else -v) / Rat(r)
            h1[m] = h1.get(m, RZERO) + q
    return Resolvent(r, s, table.shifts, _to_hseries(ctx, buckets, N), ctx)


def xi_one(table, N):
    """Independent assembly of xi^1(x) from the nontrivial-sheet sums.

    xi^1 = -sum_{g,n} hbar^(2g+n)/n! G^1_{g,n}/dx where G^1 integrates the
    spectators of U^1_{g,n}(z; .) = sum_{a=1..r-1} omega_{g,n+1}(theta^a z, .).
    Used by the resolvent contract check; shares no code path with the
    first-slot-at-z assembly beyond the spectator integral itself.
    """
    r, s = table.r, table.s
    _check_rs(r, s)
    ctx = CycContext(r)

    def sheet_sum(k0):
        # sum over a != 0 of theta^(-a k0): r - 1 on multiples of r, else -1
        return Rat(r - 1) if k0 % r == 0 else Rat(-1)

    buckets = _spectator_terms(table, N, sheet_sum)
    buckets = {h: {m: -c for m, c in b.items()} for h, b in buckets.items()}
    h0 = buckets.setdefault(0, {})
    # -(1/dx) sum_{a != 0} omega_{0,1}(theta^a z); sum theta^{as} = -1 for r ∤ s
    h0[s - r] = h0.get(s - r, RZERO) + RONE
    h1 = buckets.setdefault(1, {})
    # -(1/dx) sum_{a != 0} int_infinity^z omega_{0,2}(theta^a z, .)
    acc = ctx.zero()
    for a in range(1, r):
        th = ctx.zeta(a)
        acc = acc + th * (th - ctx.one()).inv()
    h1[-r] = h1.get(-r, RZERO) - acc.rational_of() / Rat(r)
    # -(1/dx) sum_{a != 0} omega_{1/2,1}(theta^a z)
    for (i, l), v in table.shifts.items():
        if l == 1 and v:
            eps = Rat(r - 1) if (s * (i - 1)) % r == 0 else Rat(-1)
            m = -s * (i - 1) - r
            q = -(v if i % 2 == 1 else -v) * eps / Rat(r)
            h1[m] = h1.get(m, RZERO) + q
    return _to_hseries(ctx, buckets, N)


def resolvent_contract(table, N):
    """Residual of x^(r-s) F - x^(r-s) xi^1 - (x^(r-s)/x) sum_l hbar^l S_{1,l}.

    Vanishes identically on the verified shift domain (first-family shifts
    at order 1 only); returns the residual HSeries so callers can inspect a
    witness when it does not.
    """
    F = resolvent(table, N)
    xi = xi_one(table, N)
    ctx = F.ctx
    r, s = F.r, F.s
    p0 = LaurentForm.monomial(ctx, r * (r - s), RONE, 0)
    res = (F.series - xi).map(lambda lf: lf.mul(p0))
    shift_terms = {
        l: LaurentForm.monomial(ctx, r * (r - s) - r, -v, 0)
        for (i, l), v in table.shifts.items()
        if i == 1 and v and l <= N
    }
    return res + HSeries(shift_terms, N)


# -- differential operators ----------------------------------------------------


class DiffOp:
    """Normal-ordered sum of c_{a,b}(hbar) x^a (hbar d/dx)^b.

    Exponents a are rationals with a r integral, stored as the integer
    m = a r (the z-power of x^a on the curve x = z^r).  Coefficients
    c_{a,b} are Laurent polynomials in hbar over Q, stored {hpow: Rat}.
    """

    __slots__ = ("r", "terms")

    def __init__(self, r, terms=None):
        self.r = r
        self.terms = {}
        for key, c in (terms or {}).items():
            cc = {h: v for h, v in c.items() if v}
            if cc:
                self.terms[key] = cc

    @classmethod
    def constant(cls, r, value, hpow=0):
        return cls(r, {(0, 0): {hpow: Rat(value)}})

    @classmethod
    def identity(cls, r):
        return cls.constant(r, 1)

    @classmethod
    def x_power(cls, r, m):
        """x^(m/r) as an operator (m is the z-exponent)."""
        return cls(r, {(m, 0): {0: RONE}})

    @classmethod
    def hbar_d(cls, r):
        return cls(r, {(0, 1): {0: RONE}})

    def _add_term(self, acc, m, b, hpow, v):
        c = acc.setdefault((m, b), {})
        nv = c.get(hpow, RZERO) + v
        if nv:
            c[hpow] = nv
        else:
            c.pop(hpow, None)
            if not c:
                acc.pop((m, b), None)

    def __add__(self, other):
        if not isinstance(other, DiffOp) or other.r != self.r:
            return NotImplemented
        acc = {k: dict(c) for k, c in self.terms.items()}
        for (m, b), c in other.terms.items():
            for h, v in c.items():
                self._add_term(acc, m, b, h, v)
        return DiffOp(self.r, acc)

    def __neg__(self):
        return DiffOp(
            self.r, {k: {h: -v for h, v in c.items()} for k, c in self.terms.items()}
        )

    def __sub__(self, other):
        return self + (-other)

    def scale(self, value, hpow=0):
        value = Rat(value)
        return DiffOp(
            self.r,
            {
                k: {h + hpow: v * value for h, v in c.items()}
                for k, c in self.terms.items()
            },
        )

    def __mul__(self, other):
        """Operator composition, renormal-ordered.

        (hbar d/dx)^b x^a = sum_j C(b,j) hbar^j a(a-1)..(a-j+1)
                            x^(a-j) (hbar d/dx)^(b-j).
        """
        if not isinstance(other, DiffOp) or other.r != self.r:
            return NotImplemented
        r = self.r
        acc = {}
        for (m1, b1), c1 in self.terms.items():
            for (m2, b2), c2 in other.terms.items():
                a2 = Rat(m2, r)
                ff = RONE
                for j in range(b1 + 1):
                    if j > 0:
                        ff *= a2 - Rat(j - 1)
                        if not ff:
                            break
                    w = Rat(math.comb(b1, j)) * ff
                    for h1, v1 in c1.items():
                        for h2, v2 in c2.items():
                            self._add_term(
                                acc, m1 + m2 - j * r, b1 - j + b2, h1 + h2 + j, w * v1 * v2
                            )
        return DiffOp(r, acc)

    def __eq__(self, other):
        return isinstance(other, DiffOp) and self.r == other.r and self.terms == other.terms

    def max_dorder(self):
        return max((b for (_, b) in self.terms), default=0)

    def apply_to_wave(self, F, N):
        """Q = (op psi)/psi as an HSeries of z-Laurent functions.

        F is the Resolvent of the same curve; everything is truncated at
        hbar^N.  Uses (hbar d/dx)(A psi) = (hbar dA/dx + A F) psi with
        d/dx = (r z^(r-1))^(-1) d/dz.
        """
        ctx = F.ctx
        r = self.r
        dx_inv = LaurentForm.monomial(ctx, 1 - r, Rat(1, r), 0)
        Fs = HSeries({k: v for k, v in F.series.terms.items() if k <= N}, N)

        def ddx(h):
            return h.map(lambda lf: lf.deriv().mul(dx_inv))

        def hshift(h):
            return HSeries({k + 1: v for k, v in h.terms.items()}, N)

        powers = [HSeries.const(LaurentForm.monomial(ctx, 0, RONE, 0), N)]
        for _ in range(self.max_dorder()):
            prev = powers[-1]
            powers.append(hshift(ddx(prev)) + prev * Fs)
        out = HSeries({}, N)
        for (m, b), c in self.terms.items():
            xm = LaurentForm.monomial(ctx, m, RONE, 0)
            base = powers[b].map(lambda lf: lf.mul(xm))
            for h, v in c.items():
                out = out + HSeries(
                    {k + h: lf.scalar_mul(v) for k, lf in base.terms.items()}, N
                )
        return out

    def to_jsonable(self):
        entries = []
        for (m, b) in sorted(self.terms):
            g = math.gcd(abs(m), self.r) if m else self.r
            entries.append(
                {
                    "a_num": m // g,
                    "a_den": self.r // g,
                    "b": b,
                    "c": [
                        {"hpow": h, "value": rat_to_str(v)}
                        for h, v in sorted(self.terms[(m, b)].items())
                    ],
                }
            )
        return {"r": self.r, "terms": entries}

    @classmethod
    def from_jsonable(cls, doc):
        r = doc["r"]
        terms = {}
        for e in doc["terms"]:
            m = e["a_num"] * (r // e["a_den"])
            terms[(m, e["b"])] = {
                c["hpow"]: rat_from_str(c["value"]) for c in e["c"]
            }
        return cls(r, terms)

    def __repr__(self):
        if not self.terms:
            return "DiffOp(0)"
        parts = []
        for (m, b) in sorted(self.terms):
            c = " + ".join(
                "%s*h^%d" % (rat_to_str(v), h) if h else rat_to_str(v)
                for h, v in sorted(self.terms[(m, b)].items())
            )
            seg = "(%s)" % c
            if m:
                seg += " x^(%d/%d)" % (m, self.r)
            if b:
                seg += " (h d/dx)^%d" % b
            parts.append(seg)
        return " + ".join(parts)


def build_quantum_operator(curve, N):
    """The order-r operator annihilating the shifted wave function.

    D_1 .. D_r + sum_{i,l} (-1)^i hbar^l S_{i,l} D_1 .. D_{r-i}
    x^(r-s-floor(alpha_{r-i})-i) - 1, with D_i = x^(e_i) (hbar d/dx),
    e_i = floor(alpha_i) - floor(alpha_{i-1}), truncating the shift series
    at hbar^N.
    """
    r, s = curve.r, curve.s
    _check_rs(r, s)
    prefix = [DiffOp.identity(r)]
    for i in range(1, r + 1):
        e = alpha_floor(r, s, i) - alpha_floor(r, s, i - 1)
        D = DiffOp.x_power(r, e * r) * DiffOp.hbar_d(r)
        prefix.append(prefix[-1] * D)
    op = prefix[r] - DiffOp.identity(r)
    for (i, l), v in sorted(curve.shifts.items()):
        if not v or l > N:
            continue
        a = r - s - alpha_floor(r, s, r - i) - i
        term = prefix[r - i] * DiffOp.x_power(r, a * r)
        sign = v if i % 2 == 0 else -v
        op = op + term.scale(sign, hpow=l)
    return op


class QCReport:
    """Outcome of an annihilation check: largest order with Q = 0 mod hbar^(order+1)."""

    __slots__ = ("order", "target", "witness")

    def __init__(self, order, target, witness):
        self.order = order
        self.target = target
        self.witness = witness  # None, or (hpow, z exp, coefficient repr)

    @property
    def ok(self):
        return self.order >= self.target

    def __repr__(self):
        if self.ok:
            return "QCReport(ok through hbar^%d)" % self.order
        return "QCReport(fails at hbar^%d, witness %r)" % (self.order + 1, self.witness)


def verify_quantum_curve(op, F, N):
    """Check (op psi)/psi = 0 through hbar^N; report the first failure if any."""
    Q = op.apply_to_wave(F, N)
    for k in sorted(Q.terms):
        lf = Q.terms[k]
        if lf:
            m = min(lf.coeffs)
            return QCReport(k - 1, N, (k, m, repr(lf.coeffs[m])))
    return QCReport(N, N, None)


def pretty_operator(curve, N):
    """Factored display of the operator, e.g. 'h^3 d/dx d/dx x d/dx - 1'."""
    r, s = curve.r, curve.s
    _check_rs(r, s)

    def word(n_factors):
        toks = []
        for i in range(1, n_factors + 1):
            e = alpha_floor(r, s, i) - alpha_floor(r, s, i - 1)
            if e == 1:
                toks.append("x")
            elif e:
                toks.append("x^%d" % e)
            toks.append("d/dx")
        return toks

    def xpow(a):
        if a == 0:
            return []
        if a == 1:
            return ["x"]
        return ["x^%d" % a]

    parts = ["h^%d %s" % (r, " ".join(word(r)))]
    for (i, l), v in sorted(curve.shifts.items()):
        if not v or l > N:
            continue
        c = v if i % 2 == 0 else -v
        sign = "+" if c > 0 else "-"
        mag = abs(c)
        toks = word(r - i) + xpow(r - s - alpha_floor(r, s, r - i) - i)
        coeff = "" if mag == 1 else rat_to_str(mag) + " "
        body = " ".join(toks)
        parts.append("%s %sh^%d%s" % (sign, coeff, r - i + l, " " + body if body else ""))
    parts.append("- 1")
    return " ".join(parts)
