"""W(gl_r) mode operators in the twisted Fock representation and the
constraint check H^i_k Z = 0 against a truncated partition function.

The modes are normal-ordered polynomials in multiplication and derivative
operators on Q[x_1, x_2, ..] with hbar-graded coefficients.  The current
components are J_m = d/dx_m (m > 0), J_{-m} = m x_m (m > 0), and J_0 acts
as a scalar charge (zero unless the curve carries first-row shifts).  The
dilaton twist is the affine substitution J_{-m} -> J_{-m} + F01[-m]/hbar
+ F12[-m], which is the whole effect of conjugating by
exp(sum_m (F01[-m]/hbar + F12[-m]) J_m / m) since [J_m, J_{-m}] = m and
higher brackets vanish.  For the plain curve that is J_{-s} -> J_{-s}
+ r/hbar.  Bilinear (0,2)-deformations would conjugate J_{-m} by extra
derivative terms; curves with f02 data are refused here and handled on
the geometric side only.

Everything is exact rational arithmetic: the cyclotomic Psi sums collapse
to rationals (asserted at runtime), and the partition function truncated
at a finite hbar order is a finite polynomial, so each constraint residual
is computed with no approximation at all.
"""

from __future__ import annotations

import math
from itertools import permutations

from .exact import CycContext, Rat, RZERO, rat_to_str

_psi_memo = {}


def psi_coefficient(r, j, a_list):
    """The coefficient Psi^(j)_r(a_1, .., a_m), m = i - 2j, as an exact Rat.

    Defined as (1/i!) times the sum over distinct sheet labels
    m_1, .., m_i in [0, r) of

        prod_{k=1}^{j} theta^(m_{2k-1}+m_{2k}) / (theta^(m_{2k-1}) - theta^(m_{2k}))^2
        * prod_l theta^(-m_l a_l),

    theta a primitive r-th root of unity.  The sum is Galois invariant, so
    the value is rational; this is asserted.  Only a_l mod r matters.
    """
    i = 2 * j + len(a_list)
    if j < 0 or i > r:
        raise ValueError("need 0 <= 2j <= i <= r, got r=%d j=%d i=%d" % (r, j, i))
    key = (r, j, tuple(a % r for a in a_list))
    got = _psi_memo.get(key)
    if got is not None:
        return got
    ctx = CycContext(r)
    total = ctx.zero()
    for ms in permutations(range(r), i):
        term = ctx.one()
        for k in range(j):
            m1, m2 = ms[2 * k], ms[2 * k + 1]
            d = ctx.zeta(m1) - ctx.zeta(m2)
            term = term * ctx.zeta(m1 + m2) * (d * d).inv()
        for l, a in enumerate(a_list):
            term = term * ctx.zeta(-ms[2 * j + l] * a)
        total = total + term
    val = total.rational_of() / Rat(math.factorial(i))
    _psi_memo[key] = val
    return val


def mode_floor(r, s, i):
    """Lowest admissible mode index k for the i-th family."""
    return -((s * (i - 1)) // r)


def lambda_partition(r, s):
    """The partition of r whose box-row function matches the mode floors.

    Returns (parts, floors) where parts is the partition (weakly decreasing)
    and floors[i-1] = mode_floor(r, s, i) = 1 - (index of the part holding
    the i-th box).  The identity between the two is verified exactly.
    """
    if r < 2 or not 1 <= s <= r + 1 or (s > 1 and r % s not in (1 % s, (-1) % s)):
        raise ValueError("inadmissible (r,s)=(%d,%d)" % (r, s))
    if s == 1:
        parts = (r,)
    elif s == r + 1:
        parts = (1,) * r
    else:
        # r = r's + r'' with r'' in {1, s-1} by admissibility
        rp, rpp = divmod(r, s)
        parts = tuple([rp + 1] * rpp + [rp] * (s - rpp))
    assert sum(parts) == r
    # row(i): which part the i-th box falls in, counting boxes part by part
    floors = []
    row_of = []
    for idx, p in enumerate(parts):
        row_of.extend([idx + 1] * p)
    for i in range(1, r + 1):
        fl = mode_floor(r, s, i)
        if 1 - row_of[i - 1] != fl:
            raise AssertionError(
                "partition/floor mismatch at i=%d: 1-%d != %d" % (i, row_of[i - 1], fl)
            )
        floors.append(fl)
    return parts, floors


class ModeSpec:
    """Which constraint operator to build: family index i, mode index k."""

    def __init__(self, r, s, i, k):
        if not 1 <= i <= r:
            raise ValueError("family index i must be in [1, r]")
        if k < mode_floor(r, s, i):
            raise ValueError(
                "mode k=%d below the floor %d for i=%d" % (k, mode_floor(r, s, i), i)
            )
        self.r, self.s, self.i, self.k = r, s, i, k


class WeylPoly:
    """Normal-ordered operator: sum of c(hbar) * x_{a1}..x_{am} d_{b1}..d_{bl}.

    terms: {(A, B): {hpow: Rat}} with A, B sorted index tuples.  Negative
    hbar powers are allowed transiently while assembling; a fully built
    constraint operator has floor >= 1 (asserted by the builder).
    """

    def __init__(self):
        self.terms = {}

    def add(self, A, B, hpow, coeff):
        if not coeff:
            return
        key = (tuple(sorted(A)), tuple(sorted(B)))
        h = self.terms.setdefault(key, {})
        c = h.get(hpow, RZERO) + coeff
        if c:
            h[hpow] = c
        else:
            del h[hpow]
            if not h:
                del self.terms[key]

    def hbar_floor(self):
        lows = [min(h) for h in self.terms.values() if h]
        return min(lows) if lows else None

    def apply(self, poly, hmax):
        """Apply to {monomial: {hpow: Rat}}; truncates above hbar^hmax."""
        out = {}
        for (A, B), hc in self.terms.items():
            for mono, mh in poly.items():
                # derivative factor: falling factorials of index multiplicities
                rem = list(mono)
                fac = 1
                ok = True
                for b in B:
                    cnt = rem.count(b)
                    if not cnt:
                        ok = False
                        break
                    fac *= cnt
                    rem.remove(b)
                if not ok:
                    continue
                new = tuple(sorted(rem + list(A)))
                tgt = out.setdefault(new, {})
                for h1, c1 in hc.items():
                    for h2, c2 in mh.items():
                        h = h1 + h2
                        if h > hmax:
                            continue
                        c = tgt.get(h, RZERO) + c1 * c2 * fac
                        if c:
                            tgt[h] = c
                        else:
                            del tgt[h]
                if not tgt:
                    del out[new]
        return {m: h for m, h in out.items() if h}


def _sum_tuples(m, total, lo, hi):
    """Nondecreasing integer m-tuples in [lo, hi] with the given sum."""
    if m == 0:
        if total == 0:
            yield ()
        return
    # first entry p: remaining m-1 entries in [p, hi]
    for p in range(lo, hi + 1):
        rest_min, rest_max = p * (m - 1), hi * (m - 1)
        if not rest_min <= total - p <= rest_max:
            continue
        for rest in _sum_tuples(m - 1, total - p, p, hi):
            yield (p,) + rest


def build_shifted_mode(curve, i, k, M, N, pos_cap=None, charge=None):
    """The constraint operator H^i_k as a WeylPoly.

    Assembles the normal-ordered mode sum (hbar/r)^i sum_j c_{i,j}
    sum_{p's, sum p = rk} Psi^(j)_r(p..) :prod J_p:, restricted to component
    indices within [-M, M] (and positive indices additionally capped by
    pos_cap when given, which is lossless when pos_cap bounds the variable
    indices of the polynomial the operator will act on).  The twist is the
    substitution J_{-m} -> J_{-m} + F01[-m]/hbar + F12[-m], expanded
    multilinearly over every copy of every negative component.  J_0
    contributes the scalar `charge` ({hpow: Rat}, default zero).  For k = 0
    the shift constants are subtracted: - sum_{l<=N} hbar^l S_{i,l}.

    The assembled operator has hbar floor >= 1 (asserted).
    """
    r, s = curve.r, curve.s
    spec = ModeSpec(r, s, i, k)
    if M < r * k + s * (i - 1):
        raise ValueError("window M=%d too small for the leading index %d" % (M, r * k + s * (i - 1)))
    # z^(-m-1) dz coefficients (m > 0) of the shift part of omega_{1/2,1};
    # these replace positive components, mirroring F01/F12 on the negative side
    whalf = {}
    for (si, sl), v in curve.shifts.items():
        if si >= 2 and sl == 1 and v:
            m = s * (si - 1)
            whalf[m] = whalf.get(m, RZERO) + (v if si % 2 == 1 else -v)
    whalf = {m: v for m, v in whalf.items() if v}
    hi = M if pos_cap is None else min(M, max(pos_cap, *whalf, 0))
    out = WeylPoly()
    pref_den = Rat(1, r) ** i
    for j in range(i // 2 + 1):
        m = i - 2 * j
        comb = Rat(math.factorial(i), (2**j) * math.factorial(j) * math.factorial(m))
        if m == 0:
            if k == 0:
                out.add((), (), i, pref_den * comb * psi_coefficient(r, j, ()))
            continue
        for tup in _sum_tuples(m, r * k, -M, hi):
            nzero = tup.count(0)
            if nzero and not charge:
                continue
            psi = psi_coefficient(r, j, tup)
            if not psi:
                continue
            mult = Rat(math.factorial(m))
            for p in set(tup):
                mult /= math.factorial(tup.count(p))
            base = pref_den * comb * psi * mult
            # charge factors for the J_0 components
            charge_terms = [(0, Rat(1))]
            for _ in range(nzero):
                charge_terms = [
                    (h1 + h2, c1 * c2)
                    for h1, c1 in charge_terms
                    for h2, c2 in charge.items()
                ]
            # twist: each copy of J_p is either kept (p x_p for p < 0, d_p
            # for p > 0) or replaced by the matching one-point coefficient:
            # F01[p]/hbar + F12[p] on the negative side, the z^(-p-1) dz
            # coefficient of the shift part of omega_{1/2,1} on the positive
            # side
            opts = [(0, Rat(1), (), ())]
            for p in sorted({q for q in tup if q}):
                t = tup.count(p)
                cm = []
                if p < 0:
                    v = curve.f01.get(-p)
                    if v:
                        cm.append((-1, v))
                    v = curve.f12.get(-p)
                    if v:
                        cm.append((0, v))
                else:
                    v = whalf.get(p)
                    if v:
                        cm.append((0, v))
                branch = []
                for kept in range(t, -1, -1):
                    if kept < t and not cm:
                        break
                    subs = [(0, Rat(1))]
                    for _ in range(t - kept):
                        subs = [
                            (h1 + h2, c1 * c2) for h1, c1 in subs for h2, c2 in cm
                        ]
                    if p < 0:
                        w = Rat(math.comb(t, kept)) * Rat(-p) ** kept
                        xadd, dadd = (-p,) * kept, ()
                    else:
                        w = Rat(math.comb(t, kept))
                        xadd, dadd = (), (p,) * kept
                    for hq, cq in subs:
                        branch.append((hq, w * cq, xadd, dadd))
                opts = [
                    (h1 + h2, c1 * c2, x1 + x2, d1 + d2)
                    for h1, c1, x1, d1 in opts
                    for h2, c2, x2, d2 in branch
                ]
            for hq, cq, A, B in opts:
                for hc, cc in charge_terms:
                    out.add(A, B, i + hq + hc, base * cq * cc)
    if k == 0:
        for (si, sl), v in curve.shifts.items():
            if si == i and 1 <= sl <= N:
                out.add((), (), sl, -v)
    fl = out.hbar_floor()
    assert fl is None or fl >= 1, "negative hbar power survived: %s" % fl
    return out


def _charge_of(curve, N):
    """J_0 charge series from the first-family shifts, {hpow: Rat}."""
    ch = {}
    for (si, sl), v in curve.shifts.items():
        if si == 1 and 1 <= sl <= N + 1:
            ch[sl - 1] = v
    return ch


def partition_function(table, N):
    """Truncated Z as {x-index monomial (sorted tuple): {hpow: Rat}}.

    table: {(two_g, n): {canonical keys: Rat}}.  Includes every sector with
    1 <= 2g - 2 + n <= N - 1; within that range the result is exact.
    """
    log_z = {}
    for (two_g, n), sect in table.items():
        chi = two_g - 2 + n
        if not 1 <= chi <= N - 1:
            continue
        for keys, v in sect.items():
            if hasattr(v, "rational_of"):
                v = v.rational_of()
            sym = Rat(1)
            for kk in set(keys):
                sym /= math.factorial(keys.count(kk))
            mono = tuple(sorted(keys))
            h = log_z.setdefault(mono, {})
            h[chi] = h.get(chi, RZERO) + v * sym
    z = {(): {0: Rat(1)}}
    power = {(): {0: Rat(1)}}
    for mdeg in range(1, N):
        nxt = {}
        for mono1, h1 in power.items():
            for mono2, h2 in log_z.items():
                mono = tuple(sorted(mono1 + mono2))
                tgt = nxt.setdefault(mono, {})
                for a, c1 in h1.items():
                    for b, c2 in h2.items():
                        if a + b <= N - 1:
                            tgt[a + b] = tgt.get(a + b, RZERO) + c1 * c2
        power = {m: {h: c for h, c in hh.items() if c} for m, hh in nxt.items()}
        power = {m: hh for m, hh in power.items() if hh}
        if not power:
            break
        inv = Rat(1, math.factorial(mdeg))
        for mono, hh in power.items():
            tgt = z.setdefault(mono, {})
            for h, c in hh.items():
                tgt[h] = tgt.get(h, RZERO) + c * inv
    return {m: {h: c for h, c in hh.items() if c} for m, hh in z.items() if hh}


def verify_w_constraints(curve, table, N, K):
    """Check H^i_k Z = 0 mod hbar^(N+1) for i in [r], 0 <= k <= K.

    table: {(two_g, n): {canonical keys: Rat}} complete through
    2g - 2 + n = N - 1.  Z truncated at hbar^(N-1) is an exact finite
    polynomial; positive operator indices are capped at Z's largest
    variable index (operators above it act as zero), so every reported
    residual coefficient is exact.  Returns a Report.
    """
    from .tr import Report

    if curve.f02:
        raise ValueError(
            "bilinear (0,2)-deformations are only handled geometrically; "
            "the constraint verifier needs an f02-free curve"
        )
    rep = Report("w-constraints")
    r, s = curve.r, curve.s
    kz = 0
    for sect in table.values():
        for keys in sect:
            if keys:
                kz = max(kz, max(keys))
    z = partition_function(table, N)
    charge = _charge_of(curve, N)
    M = r * K + s * (r - 1) + r * kz
    for i in range(1, r + 1):
        for k in range(0, K + 1):
            op = build_shifted_mode(curve, i, k, M, N, pos_cap=kz, charge=charge)
            res = op.apply(z, N)
            for mono in sorted(res):
                hh = res[mono]
                for h in sorted(hh):
                    if hh[h]:
                        rep.fail(
                            ("i=%d" % i, "k=%d" % k, mono),
                            {"hbar-power": h, "coefficient": rat_to_str(hh[h])},
                        )
    return rep
