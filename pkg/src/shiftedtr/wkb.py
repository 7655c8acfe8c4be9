"""hbar-connections on the (r,s) curve: WKB gauge, amplitudes, diagnostics.

The rank-r system hbar d - Phi_hbar attached to the quantum curve is
diagonalized order by order in hbar by a formal gauge transformation
U_hbar = V (Id + O(hbar)).  The scalar prefactor of V contains an r-th root
of the Vandermonde discriminant; it is never materialized: all observables
are built from the matrix parts A (of V) and B (of r V^{-1}), which satisfy
A B = r Id exactly, and the prefactor enters only through its logarithmic
derivative (r-s)(r+1)/2 dz/z, a rational scalar.

Determinantal amplitudes W_1, W_2 are computed from M = U e_a U^{-1} (the
exponential factors of the full solution cancel in M, so no regularized
integrals appear anywhere).  W_2 is kept as an exact two-variable Laurent
numerator over the fixed denominator (z1^r - z2^r)^2, so comparisons against
correlators are zero-tolerance polynomial identities.
"""

from __future__ import annotations

import itertools
import math

from .exact import CycContext, Rat, RONE, RZERO, rat_to_str
from .series import HSeries, LaurentForm


class WKBError(ValueError):
    def __init__(self, code, message):
        super().__init__("%s: %s" % (code, message))
        self.code = code


def _fl(r, s, i):
    return (i * (r - s)) // r


# -- small matrix helpers (entries: HSeries of LaurentForms) -------------------


def mzero(ctx, r, L):
    return [[HSeries({}, L) for _ in range(r)] for _ in range(r)]


def mat_from_laurent(mat, L):
    return [[HSeries({0: e}, L) if e else HSeries({}, L) for e in row] for row in mat]


def mat_add(A, B):
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_sub(A, B):
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_mul(A, B):
    n, m, p = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = None
            for k in range(m):
                if not A[i][k] or not B[k][j]:
                    continue
                t = A[i][k] * B[k][j]
                acc = t if acc is None else acc + t
            row.append(acc if acc is not None else HSeries({}, A[i][0].order))
        out.append(row)
    return out


def mat_map(A, f):
    return [[f(e) for e in row] for row in A]


def mat_hshift(A, d):
    return mat_map(A, lambda h: HSeries({k + d: v for k, v in h.terms.items()}, h.order))


def mat_d(A):
    """Entrywise exterior derivative (formdeg 0 entries -> one-forms)."""
    return mat_map(A, lambda h: h.map(lambda lf: lf.d()))


def mat_sheet(A):
    return mat_map(A, lambda h: h.map(lambda lf: lf.sheet_substitute(1)))


def mat_is_zero(A):
    return not any(any(e for e in row) for row in A)


# -- connection data ------------------------------------------------------------


class ConnectionData:
    """Phi_hbar, eigenvector matrix parts, eigenvalues and deck permutation."""

    __slots__ = ("curve", "ctx", "r", "s", "L", "Phi", "A", "B", "lam", "tau", "dlog_pref")

    def __init__(self, curve, ctx, L, Phi, A, B, lam, tau, dlog_pref):
        self.curve = curve
        self.ctx = ctx
        self.r = curve.r
        self.s = curve.s
        self.L = L
        self.Phi = Phi  # r x r, HSeries of one-forms
        self.A = A  # matrix part of V (functions)
        self.B = B  # matrix part of r V^{-1}; A B = r Id
        self.lam = lam  # eigenvalue one-forms, lam[a] = theta^a r z^{s-1} dz
        self.tau = tau  # deck permutation: column a of V maps to column tau_sigma(a)
        self.dlog_pref = dlog_pref  # scalar prefactor d-log coefficient of dz/z


def _phi_matrix(curve, ctx, L):
    r, s = curve.r, curve.s
    Phi = mzero(ctx, r, L)
    for k in range(1, r + 1):
        # first column: shift series, plus the corner 1/x^floor(alpha_1)
        terms = {}
        e = r * (_fl(r, s, r) - _fl(r, s, r + 1 - k) - k) + (r - 1)
        for (i, l), v in curve.shifts.items():
            if i == k and v and l <= L:
                c = v if k % 2 == 1 else -v
                terms[l] = LaurentForm.monomial(ctx, e, c * Rat(r), 1)
        if k == r:
            e0 = -r * _fl(r, s, 1) + (r - 1)
            lf = LaurentForm.monomial(ctx, e0, Rat(r), 1)
            terms[0] = terms.get(0, LaurentForm.zero(ctx, 1)) + lf
        Phi[k - 1][0] = HSeries(terms, L)
        if k < r:
            e1 = r * (_fl(r, s, r - k) - _fl(r, s, r + 1 - k)) + (r - 1)
            Phi[k - 1][k] = HSeries(
                {0: LaurentForm.monomial(ctx, e1, Rat(r), 1)}, L
            )
    return Phi


def build_connection_data(curve, L):
    """Connection potential and exact diagonalization data, verified.

    Every structural identity (A B = r Id, phi = A Y B / r, deck action,
    characteristic polynomial of the Higgs field) is checked exactly; a
    failure is a construction bug and raises.
    """
    r, s = curve.r, curve.s
    if curve.f01 != {s: Rat(r)} or curve.f12 or curve.f02:
        raise WKBError("unsupported-case", "connection data needs an undeformed curve")
    ctx = curve.ctx
    Phi = _phi_matrix(curve, ctx, L)
    # row scaling of the eigenvector matrix: the k-th component of the
    # eigenvector must track the first column of Phi, so the diagonal factor
    # is z^(r(floor a_r - floor a_{r+1-k})), not z^(r floor a_k)
    dk = [r * (_fl(r, s, r) - _fl(r, s, r + 1 - k)) for k in range(1, r + 1)]
    A = [
        [
            LaurentForm.monomial(ctx, dk[k - 1] - k * (r - s), ctx.zeta(a * k), 0)
            for a in range(r)
        ]
        for k in range(1, r + 1)
    ]
    B = [
        [
            LaurentForm.monomial(ctx, k * (r - s) - dk[k - 1], ctx.zeta(-a * k), 0)
            for k in range(1, r + 1)
        ]
        for a in range(r)
    ]
    lam = [LaurentForm.monomial(ctx, s - 1, ctx.zeta(a) * Rat(r), 1) for a in range(r)]
    tau = [(a + s) % r for a in range(r)]  # column a of V(theta z) is column a+s of V(z)
    data = ConnectionData(
        curve, ctx, L, Phi, A, B, lam, tau, Rat((r - s) * (r + 1), 2)
    )
    _verify_connection(data)
    return data


def _verify_connection(data):
    r, ctx = data.r, data.ctx
    A, B, lam, tau = data.A, data.B, data.lam, data.tau
    one = LaurentForm.monomial(ctx, 0, RONE, 0)
    # A B = r Id
    for i in range(r):
        for j in range(r):
            acc = LaurentForm.zero(ctx)
            for k in range(r):
                acc = acc + A[i][k].mul(B[k][j])
            want = one.scalar_mul(Rat(r)) if i == j else LaurentForm.zero(ctx)
            if acc != want:
                raise WKBError("construction", "A B != r Id at (%d,%d)" % (i, j))
    # phi = (1/r) A Y B
    phi = [[e.coeff(0) or LaurentForm.zero(ctx, 1) for e in row] for row in data.Phi]
    for i in range(r):
        for j in range(r):
            acc = LaurentForm.zero(ctx, 1)
            for a in range(r):
                acc = acc + A[i][a].mul(lam[a]).mul(B[a][j]).scalar_mul(Rat(1, r))
            if acc != phi[i][j]:
                raise WKBError("construction", "phi != V Y V^-1 at (%d,%d)" % (i, j))
    # deck action on eigenvector columns and eigenvalues
    for k in range(r):
        for a in range(r):
            if A[k][a].sheet_substitute(1) != A[k][tau[a]]:
                raise WKBError("construction", "V(theta z) != V(z) tau at (%d,%d)" % (k, a))
    for a in range(r):
        if lam[a].sheet_substitute(1) != lam[tau[a]]:
            raise WKBError("construction", "Y deck action fails at %d" % a)
    # tau is the s-th power of a cyclic generator and tau^r = id
    sigma = list(range(r))
    for _ in range(data.s):
        sigma = [(x + 1) % r for x in sigma]
    if sigma != tau:
        raise WKBError("construction", "tau is not (cyclic)^s")
    power = list(range(r))
    for _ in range(r):
        power = [tau[x] for x in power]
    if power != list(range(r)):
        raise WKBError("construction", "tau^r != Id")
    # det(omega Id - phi) = omega^r - x^(s-r) dx^r: all intermediate
    # principal-minor sums vanish and the full determinant is -x^(s-r) dx^r
    for k in range(1, r):
        if laurent_minor_sum(phi, k, ctx):
            raise WKBError("construction", "char poly coefficient at k=%d nonzero" % k)
    det = laurent_det(phi, list(range(r)), ctx)
    want = LaurentForm.monomial(
        ctx, r * (data.s - r) + r * (r - 1), -Rat(r) ** r, r
    )
    # (-1)^r m_r = -x^(s-r) dx^r with dx = r z^(r-1) dz
    if det.scalar_mul(Rat((-1) ** r)) != want:
        raise WKBError("construction", "det(omega Id - phi) constant term wrong")


def laurent_det(mat, rows, ctx, cols=None):
    """Determinant of the square submatrix mat[rows][cols], Laurent entries."""
    if cols is None:
        cols = rows
    if not rows:
        return LaurentForm.monomial(ctx, 0, RONE, 0)
    i = rows[0]
    rest = rows[1:]
    acc = None
    for pos, j in enumerate(cols):
        e = mat[i][j]
        if not e:
            continue
        sub = laurent_det(mat, rest, ctx, cols[:pos] + cols[pos + 1 :])
        term = e.mul(sub)
        if pos % 2 == 1:
            term = -term
        acc = term if acc is None else acc + term
    return acc if acc is not None else LaurentForm.zero(ctx)


def laurent_minor_sum(mat, k, ctx):
    """Sum of principal k x k minors (Laurent entries)."""
    acc = None
    for rows in itertools.combinations(range(len(mat)), k):
        d = laurent_det(mat, list(rows), ctx)
        acc = d if acc is None else acc + d
    return acc


# -- formal gauge ----------------------------------------------------------------


class Gauge:
    """Solved WKB gauge: u_l, the diagonal potential, and U, U^{-1} matrix parts."""

    __slots__ = ("us", "yhat", "U", "Uinv", "L")

    def __init__(self, us, yhat, U, Uinv, L):
        self.us = us  # {l: matrix of LaurentForms (formdeg 0), zero diagonal}
        self.yhat = yhat  # [HSeries of one-forms], diagonal entries
        self.U = U
        self.Uinv = Uinv
        self.L = L


def _exp_factor(ctx, u, ell, L, sign, r):
    out = mat_from_laurent(
        [[LaurentForm.monomial(ctx, 0, RONE, 0) if i == j else LaurentForm.zero(ctx) for j in range(r)] for i in range(r)],
        L,
    )
    power = mat_from_laurent(u, L)
    j = 1
    while j * ell <= L:
        c = Rat(sign**j, math.factorial(j))
        out = mat_add(
            out,
            mat_hshift(mat_map(power, lambda h: h.map(lambda lf: lf.scalar_mul(c))), j * ell),
        )
        if (j + 1) * ell <= L:
            power = mat_mul(power, mat_from_laurent(u, L))
        j += 1
    return out


def _gauge_matrices(data, us, L):
    ctx, r = data.ctx, data.r
    P = mat_from_laurent(
        [[LaurentForm.monomial(ctx, 0, RONE, 0) if i == j else LaurentForm.zero(ctx) for j in range(r)] for i in range(r)],
        L,
    )
    Pinv = [row[:] for row in P]
    for ell in sorted(us):
        P = mat_mul(P, _exp_factor(ctx, us[ell], ell, L, 1, r))
        Pinv = mat_mul(_exp_factor(ctx, us[ell], ell, L, -1, r), Pinv)
    Ah = mat_from_laurent(data.A, L)
    Bh = mat_from_laurent(
        [[e.scalar_mul(Rat(1, data.r)) for e in row] for row in data.B], L
    )
    return mat_mul(Ah, P), mat_mul(Pinv, Bh)


def _hat_potential(data, us, L):
    U, Uinv = _gauge_matrices(data, us, L)
    ctx, r = data.ctx, data.r
    conj = mat_mul(mat_mul(Uinv, data.Phi), U)
    du = mat_hshift(mat_mul(Uinv, mat_d(U)), 1)
    out = mat_sub(conj, du)
    pref = HSeries({1: LaurentForm.monomial(ctx, -1, data.dlog_pref, 1)}, L)
    for i in range(r):
        out[i][i] = out[i][i] - pref
    return out, U, Uinv


def solve_formal_gauge(data, L):
    """Off-diagonal u_l (diagonal fixed to zero) making the potential diagonal.

    At each order the off-diagonal part of the conjugated potential is
    cancelled by [Y_0, u_l]; the eigenvalue differences of Y_0 are nonzero
    monomials, so the division is exact.
    """
    ctx, r = data.ctx, data.r
    us = {}
    for ell in range(1, L + 1):
        hat, _, _ = _hat_potential(data, us, ell)
        u = [[LaurentForm.zero(ctx) for _ in range(r)] for _ in range(r)]
        for i in range(r):
            for j in range(r):
                if i == j:
                    continue
                c = hat[i][j].coeff(ell)
                if c:
                    diff = data.lam[j] - data.lam[i]
                    u[i][j] = c.mul(diff.invert())
        us[ell] = u
    hat, U, Uinv = _hat_potential(data, us, L)
    for i in range(r):
        for j in range(r):
            if i != j and hat[i][j]:
                raise WKBError(
                    "construction",
                    "gauge recursion left an off-diagonal residual at (%d,%d)" % (i, j),
                )
    yhat = [hat[i][i] for i in range(r)]
    for a in range(r):
        moved = yhat[a].map(lambda lf: lf.sheet_substitute(1))
        if moved - yhat[data.tau[a]]:
            raise WKBError("construction", "Y_hat deck equivariance fails at %d" % a)
    return Gauge(us, yhat, U, Uinv, L)


# -- two-variable Laurent polynomials ---------------------------------------------


class Lau2:
    """Finite Laurent polynomial in two variables, CycNum coefficients."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx, coeffs=None):
        self.ctx = ctx
        self.coeffs = {k: c for k, c in (coeffs or {}).items() if c}

    @classmethod
    def product(cls, f, g):
        """f(z1) g(z2) for one-variable LaurentForms (form degrees ignored)."""
        out = {}
        for m1, c1 in f.coeffs.items():
            for m2, c2 in g.coeffs.items():
                p = c1 * c2
                k = (m1, m2)
                s = out.get(k)
                s = p if s is None else s + p
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
        return cls(f.ctx, out)

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        return isinstance(other, Lau2) and self.coeffs == other.coeffs

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            s = out.get(k)
            s = c if s is None else s + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return Lau2(self.ctx, out)

    def __neg__(self):
        return Lau2(self.ctx, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Lau2):
            return Lau2(self.ctx, {k: c * other for k, c in self.coeffs.items()})
        out = {}
        for (a1, a2), c1 in self.coeffs.items():
            for (b1, b2), c2 in other.coeffs.items():
                k = (a1 + b1, a2 + b2)
                p = c1 * c2
                s = out.get(k)
                s = p if s is None else s + p
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
        return Lau2(self.ctx, out)

    __rmul__ = __mul__

    def __repr__(self):
        return "Lau2(%s)" % ", ".join(
            "z1^%d z2^%d: %r" % (m1, m2, c) for (m1, m2), c in sorted(self.coeffs.items())
        )


def bergman_numerator(ctx, r):
    """(z1^r - z2^r)^2 / (z1 - z2)^2 as a two-variable polynomial."""
    s = Lau2(ctx, {(j, r - 1 - j): ctx.one() for j in range(r)})
    return s * s


def pair_denominator(ctx, r):
    """(z1^r - z2^r)^2."""
    one = ctx.one()
    return Lau2(ctx, {(2 * r, 0): one, (r, r): one * Rat(-2), (0, 2 * r): one})


# -- amplitudes -------------------------------------------------------------------


def _projector(gauge, a):
    """M = U e_a U^{-1}: rank one, column a of U times row a of U^{-1}."""
    r = len(gauge.U)
    return [[gauge.U[i][a] * gauge.Uinv[a][j] for j in range(r)] for i in range(r)]


def amplitudes(data, gauge, a, points, L):
    """Determinantal amplitudes on the Cartan label a.

    points=1: W_1 = (1/hbar) Tr(M Phi), an HSeries of one-forms (orders
    from hbar^(-1)).  points=2: the exact numerator N with
    W_2 = N(z1, z2) dz1 dz2 / (z1^r - z2^r)^2, as an HSeries of Lau2.
    Both variables stay symbolic, so the coinciding-point prescription for
    the kernel diagonal is never needed here.
    """
    r = data.r
    M = _projector(gauge, a)
    if points == 1:
        acc = HSeries({}, L)
        for i in range(r):
            for j in range(r):
                if M[i][j] and data.Phi[j][i]:
                    acc = acc + M[i][j] * data.Phi[j][i]
        return acc.shift_power(-1)
    if points != 2:
        raise WKBError("unsupported-case", "only 1- and 2-point amplitudes are built")
    ctx = data.ctx
    pref = Rat(r) ** 2
    out = {}
    for i in range(r):
        for j in range(r):
            if not M[i][j] or not M[j][i]:
                continue
            for h1, f in M[i][j].terms.items():
                for h2, g in M[j][i].terms.items():
                    h = h1 + h2
                    if h > L:
                        continue
                    t = Lau2.product(f, g)
                    prev = out.get(h)
                    out[h] = t if prev is None else prev + t
    mono = Lau2(ctx, {(r - 1, r - 1): ctx.scalar(pref)})
    return HSeries({h: mono * v for h, v in out.items()}, L)


def cross_check(table, data, gauge, w1_max=None, w2_max=None):
    """Trifecta: amplitude hbar-coefficients against the recursion table.

    W_1' = W_1 - omega_{0,1}/hbar must match omega_{g,1} at hbar^(2g-1) for
    2g-1 <= w1_max, and W_2 must match omega_{g,2} at hbar^(2g) for
    2g <= w2_max.  The table must hold sectors up to those Euler
    characteristics; the gauge must be solved at least one order past w1_max.
    """
    from .tr import Report

    rep = Report("wkb-cross-check")
    ctx, r, s = data.ctx, data.r, data.s
    curve = data.curve
    L = gauge.L
    if w1_max is None:
        w1_max = L - 1
    if w2_max is None:
        w2_max = L - 1
    w1 = amplitudes(data, gauge, 0, 1, L)
    om01 = LaurentForm.monomial(ctx, s - 1, ctx.scalar(Rat(r)), 1)
    d = (w1.coeff(-1) or LaurentForm.zero(ctx, 1)) - om01
    if d:
        rep.fail(("W1", "hbar^-1"), {m: repr(c) for m, c in d.coeffs.items()})
    for k in range(0, w1_max + 1):
        got = w1.coeff(k) or LaurentForm.zero(ctx, 1)
        if k == 0:
            want = curve.omega_half()
        else:
            two_g = k + 1
            want = LaurentForm.zero(ctx, 1)
            for keys, v in table.section(two_g, 1).items():
                want = want + LaurentForm.monomial(ctx, -keys[0] - 1, ctx.scalar(v), 1)
        diff = got - want
        if diff:
            rep.fail(("W1", "hbar^%d" % k), {m: repr(c) for m, c in diff.coeffs.items()})
    w2 = amplitudes(data, gauge, 0, 2, L)
    denom = pair_denominator(ctx, r)
    for h in range(0, w2_max + 1):
        got = w2.coeff(h) or Lau2(ctx)
        if h == 0:
            want = bergman_numerator(ctx, r)
        else:
            acc = Lau2(ctx)
            for keys, v in table.section(h, 2).items():
                k1, k2 = keys
                cv = ctx.scalar(v)
                acc = acc + Lau2(ctx, {(-k1 - 1, -k2 - 1): cv})
                if k1 != k2:
                    acc = acc + Lau2(ctx, {(-k2 - 1, -k1 - 1): cv})
            want = denom * acc
        diff = got - want
        if diff:
            rep.fail(
                ("W2", "hbar^%d" % h),
                {"%d,%d" % k: repr(c) for k, c in sorted(diff.coeffs.items())[:6]},
            )
    return rep


# -- symbolic determinant diagnostic ----------------------------------------------


class DPoly:
    """Polynomial in formal matrix entries M_{ij} over Q[hbar, z, 1/z].

    Monomial keys are sorted tuples of (i, j) pairs; coefficients are
    {(hbar power, z exponent): Rat}.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        for mk, c in (terms or {}).items():
            cc = {k: v for k, v in c.items() if v}
            if cc:
                self.terms[mk] = cc

    @classmethod
    def scalar(cls, hpow, zexp, value):
        return cls({(): {(hpow, zexp): Rat(value)}})

    @classmethod
    def variable(cls, i, j, value=1):
        return cls({((i, j),): {(0, 0): Rat(value)}})

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        out = {mk: dict(c) for mk, c in self.terms.items()}
        for mk, c in other.terms.items():
            dst = out.setdefault(mk, {})
            for k, v in c.items():
                nv = dst.get(k, RZERO) + v
                if nv:
                    dst[k] = nv
                else:
                    dst.pop(k, None)
            if not dst:
                out.pop(mk, None)
        return DPoly(out)

    def __neg__(self):
        return DPoly({mk: {k: -v for k, v in c.items()} for mk, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out = {}
        for mk1, c1 in self.terms.items():
            for mk2, c2 in other.terms.items():
                mk = tuple(sorted(mk1 + mk2))
                dst = out.setdefault(mk, {})
                for (h1, z1), v1 in c1.items():
                    for (h2, z2), v2 in c2.items():
                        k = (h1 + h2, z1 + z2)
                        nv = dst.get(k, RZERO) + v1 * v2
                        if nv:
                            dst[k] = nv
                        else:
                            dst.pop(k, None)
                if not dst:
                    out.pop(mk, None)
        return DPoly(out)

    def shift_z(self, d):
        return DPoly(
            {mk: {(h, z + d): v for (h, z), v in c.items()} for mk, c in self.terms.items()}
        )


def dpoly_det(mat):
    """Determinant over the DPoly ring, expansion memoized on row subsets."""
    r = len(mat)
    memo = {}

    def rec(row, cols):
        if row == r:
            return DPoly.scalar(0, 0, 1)
        key = cols
        if key in memo:
            return memo[key]
        acc = DPoly()
        lst = [c for c in range(r) if cols & (1 << c)]
        for pos, c in enumerate(lst):
            e = mat[row][c]
            if not e:
                continue
            sub = rec(row + 1, cols & ~(1 << c))
            term = e * sub
            if pos % 2 == 1:
                term = -term
            acc = acc + term
        memo[key] = acc
        return acc

    return rec(0, (1 << r) - 1)


def _symbolic_system_matrix(r, s, shifts):
    """y Id - F_hbar - M with symbolic M, z-realized entries."""
    mat = [[DPoly() for _ in range(r)] for _ in range(r)]
    for i in range(r):
        for j in range(r):
            mat[i][j] = mat[i][j] - DPoly.variable(i + 1, j + 1)
        mat[i][i] = mat[i][i] + DPoly.scalar(0, s - r, 1)
    for k in range(1, r + 1):
        e = r * (_fl(r, s, r) - _fl(r, s, r + 1 - k) - k)
        for (i, l), v in sorted(shifts.items()):
            if i == k and v:
                c = v if k % 2 == 1 else -v
                mat[k - 1][0] = mat[k - 1][0] - DPoly.scalar(l, e, c)
        if k == r:
            mat[k - 1][0] = mat[k - 1][0] - DPoly.scalar(0, -r * _fl(r, s, 1), 1)
        if k < r:
            e1 = r * (_fl(r, s, r - k) - _fl(r, s, r + 1 - k))
            mat[k - 1][k] = mat[k - 1][k] - DPoly.scalar(0, e1, 1)
    return mat


def expected_constant_term(r, s, shifts):
    """sum_j (-1)^j S_j^hbar z^((1-j)s-1), as {(hpow, zexp): Rat}."""
    out = {}
    for (j, l), v in shifts.items():
        if v:
            k = (l, (1 - j) * s - 1)
            nv = out.get(k, RZERO) + (v if j % 2 == 0 else -v)
            if nv:
                out[k] = nv
            else:
                out.pop(k, None)
    return out


class DiagnosticRecord:
    __slots__ = ("r", "s", "shifts", "min_exponent", "holomorphic", "condition")

    def __init__(self, r, s, shifts, min_exponent, holomorphic, condition):
        self.r = r
        self.s = s
        self.shifts = shifts
        self.min_exponent = min_exponent
        self.holomorphic = holomorphic
        self.condition = condition  # 1 | 2 | 3 | None

    def to_jsonable(self):
        return {
            "r": self.r,
            "s": self.s,
            "shifts": [
                {"i": i, "l": l, "value": rat_to_str(v)}
                for (i, l), v in sorted(self.shifts.items())
            ],
            "min_exponent": self.min_exponent,
            "holomorphic": self.holomorphic,
            "condition": self.condition,
        }

    def __repr__(self):
        return "DiagnosticRecord(r=%d, s=%d, min_exp=%s, condition=%r)" % (
            self.r,
            self.s,
            self.min_exponent,
            self.condition,
        )


def determinant_diagnostic(r, s, shifts):
    """Constant term and pole classification of the symbolic determinant.

    D(z, M) = det(y dx Id - Phi_hbar - M dx)/E_omega with M a matrix of r^2
    formal indeterminates.  Returns (D(z,0) coefficients, record); the
    record carries the minimal z-exponent over all M-dependent monomial
    coefficients and which (if any) of the three topological-type conditions
    the input satisfies.
    """
    if math.gcd(r, s) != 1:
        raise WKBError("invalid-input", "gcd(r,s) must be 1")
    shifts = {k: Rat(v) for k, v in shifts.items() if v}
    det = dpoly_det(_symbolic_system_matrix(r, s, shifts))
    D = det.shift_z((r - 1) * (r + 1 - s))
    d0 = dict(D.terms.get((), {}))
    min_exp = None
    for mk, c in D.terms.items():
        if not mk:
            continue
        for (_, z) in c:
            if min_exp is None or z < min_exp:
                min_exp = z
    holo = min_exp is None or min_exp >= 0
    gate = s == 1 or r % s in (1 % s, (s - 1) % s)
    condition = None
    if gate:
        if s == 1:
            condition = 1
        elif r % s == 1 % s and all(i == 1 or not v for (i, _), v in shifts.items()):
            condition = 2
        elif not any(shifts.values()):
            condition = 3
    return d0, DiagnosticRecord(r, s, shifts, min_exp, holo, condition)


# -- Casimir bookkeeping -----------------------------------------------------------


def casimir_coordinates(r, k):
    """Coefficient tensor of omega^(r-k) in det(omega Id - E), E symbolic.

    Returned as {monomial: Rat} with the (-1)^k prefactor stripped, i.e.
    the sum over the monomial evaluations equals the sum of principal k x k
    minors of E.
    """
    mat = [[DPoly() for _ in range(r)] for _ in range(r)]
    for i in range(r):
        for j in range(r):
            mat[i][j] = mat[i][j] - DPoly.variable(i + 1, j + 1)
        # track omega degree in the hbar slot
        mat[i][i] = mat[i][i] + DPoly.scalar(1, 0, 1)
    det = dpoly_det(mat)
    sign = Rat((-1) ** k)
    out = {}
    for mk, c in det.terms.items():
        v = c.get((r - k, 0))
        if v:
            out[mk] = v * sign
    return out


def casimir_eval(coords, mat, zero):
    """Evaluate a coordinate tensor on a matrix of HSeries (1-based indices)."""
    acc = zero
    for mk, v in coords.items():
        term = None
        for (i, j) in mk:
            e = mat[i - 1][j - 1]
            term = e if term is None else term * e
        if term is not None:
            acc = acc + term * v
    return acc
