"""Exact scalar arithmetic: rationals and the cyclotomic field Q(zeta_r).

Everything downstream (series coefficients, correlators, matrix entries) is
built on the two types here.  Rat is an arbitrary-precision reduced rational;
CycNum is an element of Q[t]/Phi_r(t) where Phi_r is the r-th cyclotomic
polynomial, so t is a primitive r-th root of unity and CycNum is a field
element (every nonzero element is invertible).

No floats anywhere.
"""

from __future__ import annotations

import fractions

try:
    from gmpy2 import mpq as Rat
except ImportError:  # pragma: no cover - gmpy2 is normally present
    Rat = fractions.Fraction

RZERO = Rat(0)
RONE = Rat(1)


def rat_from_str(s):
    """Parse "p/q" or "p" into a Rat."""
    s = s.strip()
    if "/" in s:
        p, q = s.split("/")
        return Rat(int(p), int(q))
    return Rat(int(s))


def rat_to_str(x):
    """Canonical "p/q" form, "p" when the denominator is 1."""
    n, d = x.numerator, x.denominator
    if d == 1:
        return str(n)
    return "%d/%d" % (n, d)


def _poly_trim(c):
    while c and not c[-1]:
        c.pop()
    return c


def _poly_divmod(a, b):
    """Quotient and remainder of rational coefficient lists (ascending)."""
    a = list(a)
    q = [RZERO] * max(0, len(a) - len(b) + 1)
    inv = RONE / b[-1]
    for i in range(len(a) - len(b), -1, -1):
        f = a[i + len(b) - 1] * inv
        if f:
            q[i] = f
            for j, bj in enumerate(b):
                a[i + j] -= f * bj
    return _poly_trim(q), _poly_trim(a[: len(b) - 1])


def cyclotomic_poly(r):
    """Coefficients (ascending, monic) of Phi_r, by exact division.

    t^r - 1 = prod_{d | r} Phi_d, so Phi_r = (t^r - 1) / prod_{d|r, d<r} Phi_d.

    >>> cyclotomic_poly(1)
    [-1, 1]
    >>> cyclotomic_poly(2)
    [1, 1]
    >>> cyclotomic_poly(6)
    [1, -1, 1]
    """
    num = [RZERO] * (r + 1)
    num[0], num[r] = -RONE, RONE
    for d in range(1, r):
        if r % d == 0:
            num, rem = _poly_divmod(num, cyclotomic_poly(d))
            assert not rem
    return num


class CycContext:
    """Arithmetic context for Q[t]/Phi_r(t).

    Holds Phi_r, reduction data, and a table of the powers zeta^m
    (m = 0..r-1) in the monomial basis 1, t, .., t^(deg-1).
    """

    _cache: dict[int, "CycContext"] = {}

    def __new__(cls, r):
        if r in cls._cache:
            return cls._cache[r]
        self = object.__new__(cls)
        self.r = r
        self.phi = cyclotomic_poly(r)
        self.deg = len(self.phi) - 1
        # reduction of t^k for k = deg .. 2*deg-2, precomputed
        red = []
        cur = [-c for c in self.phi[:-1]]  # t^deg
        red.append(list(cur))
        for _ in range(self.deg - 2):
            cur = [RZERO] + cur
            if len(cur) > self.deg:
                lead = cur.pop()
                if lead:
                    for j in range(self.deg):
                        cur[j] -= lead * self.phi[j]
            red.append(list(cur))
        self._red = red
        cls._cache[r] = self
        self.zeta_pows = [self._tpow(m) for m in range(r)]
        return self

    def _tpow(self, m):
        c = [RZERO] * self.deg
        if m < self.deg:
            c[m] = RONE
            return CycNum(self, c)
        # reduce t^m mod Phi_r by repeated squaring is overkill; m < r is small
        cur = [RZERO] * self.deg
        cur[self.deg - 1] = RONE
        for _ in range(m - self.deg + 1):
            lead = cur[-1]
            cur = [RZERO] + cur[:-1]
            if lead:
                for j, rc in enumerate(self._red[0]):
                    cur[j] += lead * rc
        return CycNum(self, cur)

    def zero(self):
        return CycNum(self, [RZERO] * self.deg)

    def one(self):
        return self.scalar(RONE)

    def scalar(self, x):
        c = [RZERO] * self.deg
        c[0] = Rat(x)
        return CycNum(self, c)

    def zeta(self, m=1):
        """zeta^m as a field element, any integer m."""
        return self.zeta_pows[m % self.r]

    def __repr__(self):
        return "CycContext(r=%d)" % self.r


class CycNum:
    """Element of Q[t]/Phi_r(t), dense coefficient vector of length deg(Phi_r).

    Always kept reduced (len(coeffs) == ctx.deg).
    """

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx, coeffs):
        assert len(coeffs) == ctx.deg
        self.ctx = ctx
        self.coeffs = coeffs

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, CycNum):
            return self.ctx.r == other.ctx.r and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash((self.ctx.r, tuple(self.coeffs)))

    def __add__(self, other):
        if not isinstance(other, CycNum):
            return NotImplemented
        return CycNum(self.ctx, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        if not isinstance(other, CycNum):
            return NotImplemented
        return CycNum(self.ctx, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return CycNum(self.ctx, [-a for a in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, CycNum):
            ca, cb = self.coeffs, other.coeffs
            # scalar fast paths: most coefficients in practice are rational
            if not any(ca[1:]):
                a0 = ca[0]
                if not a0:
                    return self
                if a0 == RONE:
                    return other
                return CycNum(other.ctx, [a0 * b for b in cb])
            if not any(cb[1:]):
                b0 = cb[0]
                if not b0:
                    return other
                if b0 == RONE:
                    return self
                return CycNum(self.ctx, [a * b0 for a in ca])
            d = self.ctx.deg
            prod = [RZERO] * (2 * d - 1)
            for i, a in enumerate(ca):
                if a:
                    for j, b in enumerate(cb):
                        if b:
                            prod[i + j] += a * b
            out = prod[:d]
            for k in range(d, 2 * d - 1):
                c = prod[k]
                if c:
                    for j, rc in enumerate(self.ctx._red[k - d]):
                        out[j] += c * rc
            return CycNum(self.ctx, out)
        # rational scalar
        q = Rat(other)
        return CycNum(self.ctx, [a * q for a in self.coeffs])

    __rmul__ = __mul__

    def scalar_mul(self, q):
        return CycNum(self.ctx, [a * q for a in self.coeffs])

    def inv(self):
        """Multiplicative inverse via extended Euclid in Q[t]."""
        if not self:
            raise ZeroDivisionError("inverse of zero in Q(zeta_%d)" % self.ctx.r)
        # extended gcd of self (as poly) and Phi_r
        a = _poly_trim(list(self.coeffs))
        b = list(self.ctx.phi)
        sa, sb = [RONE], []
        while b:
            q, r = _poly_divmod(a, b)
            # new s = sa - q*sb
            ns = list(sa)
            for i, qi in enumerate(q):
                if qi:
                    for j, sj in enumerate(sb):
                        k = i + j
                        while len(ns) <= k:
                            ns.append(RZERO)
                        ns[k] -= qi * sj
            a, b = b, r
            sa, sb = sb, _poly_trim(ns)
        # a is gcd (a nonzero constant, since Phi_r is irreducible and self != 0 mod Phi_r)
        assert len(a) == 1
        inv_g = RONE / a[0]
        c = [s * inv_g for s in sa]
        c += [RZERO] * (self.ctx.deg - len(c))
        out = self.ctx.zero() + CycNum(self.ctx, c[: self.ctx.deg])
        assert (out * self) == self.ctx.one()
        return out

    def __truediv__(self, other):
        if isinstance(other, CycNum):
            return self * other.inv()
        return CycNum(self.ctx, [a / Rat(other) for a in self.coeffs])

    def is_rational(self):
        return not any(self.coeffs[1:])

    def rational_of(self):
        """The value as a Rat; raises if the element is genuinely irrational."""
        if not self.is_rational():
            raise ValueError("not a rational number: %r" % (self,))
        return self.coeffs[0]

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                if i == 0:
                    terms.append(rat_to_str(c))
                else:
                    terms.append("%s*zeta^%d" % (rat_to_str(c), i))
        return " + ".join(terms) if terms else "0"


def vandermonde_discriminant(ctx):
    """prod_{0 <= a < b < r} (zeta^b - zeta^a), an exact CycNum."""
    out = ctx.one()
    for a in range(ctx.r):
        for b in range(a + 1, ctx.r):
            out = out * (ctx.zeta(b) - ctx.zeta(a))
    return out
