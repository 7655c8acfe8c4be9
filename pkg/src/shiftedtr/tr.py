"""Shifted topological recursion engine and its verifiers.

Correlators are stored as tensors in the xi-basis: omega_{g,n}(z_1..z_n) =
sum F[k_1..k_n] prod_j xi_{-k_j}(z_j).  The engine computes, for each target
(2g, n+1),

  omega_{g,n+1}(z0, ..) = -Res_{z=0}[ sum_{nonempty Z in f'(z)} K^{1+|Z|}(z0; z, Z)
                                       W'_{g,1+|Z|,n}(z, Z; ..)
                          - delta_{n,0} sum_i S_{i,2g} K^r(z0; f(z))
                                       (r dz/z)^i (-omega01(z))^{r-i} ]

with the kernel numerator expanded as sum_k z^k xi_{-k}(z0), so output lands
directly in the xi-basis.  Fiber points are sheet labels a (meaning theta^a z);
the base sheet is a = 0.

Spectator variables are never pinned to numeric points: a W-combination is a
tensor {spectator key tuple -> LaurentForm in z}.  The only infinite family,
omega_{0,2}(theta^a z, z_j) = sum_k k theta^{ak} z^{k-1} dz (x) xi_{-k}(z_j),
is cut off by an exponent cap that the caller derives from the pole orders of
the other factors, so no reported coefficient is ever affected.
"""

from __future__ import annotations

from itertools import permutations, product

from .exact import Rat, RZERO
from .series import LaurentForm


class MissingDependencyError(RuntimeError):
    def __init__(self, two_g, n):
        super().__init__("missing correlator sector (2g=%d, n=%d)" % (two_g, n))
        self.sector = (two_g, n)


def set_partitions(items):
    """All set partitions of a list, as lists of tuples."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [(first,) + part[i]] + part[i + 1 :]
        yield [(first,)] + part


def compositions(total, parts):
    """All tuples of `parts` nonnegative integers summing to `total`."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in compositions(total - head, parts - 1):
            yield (head,) + tail


def _distinct_permutations(keys):
    return set(permutations(keys))


class Report:
    """Outcome of a verifier: ok flag plus structured failure records."""

    def __init__(self, check):
        self.check = check
        self.failures = []

    @property
    def ok(self):
        return not self.failures

    def fail(self, location, witness):
        self.failures.append({"location": location, "witness": witness})

    def to_jsonable(self):
        return {
            "check": self.check,
            "status": "pass" if self.ok else "fail",
            "failures": [
                {"location": repr(f["location"]), "witness": repr(f["witness"])}
                for f in self.failures
            ],
        }

    def __repr__(self):
        return "<Report %s: %s (%d failures)>" % (
            self.check,
            "pass" if self.ok else "FAIL",
            len(self.failures),
        )


class RecursionState:
    """Engine state: curve, computed correlators, memoized block evaluations.

    G: slot-resolved tensors {(two_g, n): {key tuple (len n): CycNum}}.
    F: canonical (sorted-key) view used for lookups during recursion.
    strict: demand rational values (Galois symmetry); the test-only
    unchecked path sets strict=False so deliberately broken shift data can
    be run to completion and adjudicated by verify_symmetry.
    """

    def __init__(self, curve, strict=True):
        self.curve = curve
        self.ctx = curve.ctx
        self.strict = strict
        self.G = {}
        self.F = {}
        self.chi_done = 0
        self._block_memo = {}
        self._dp_memo = {}
        self._defer_memo = {}

    # ------------------------------------------------------------------ #
    # block evaluation                                                    #
    # ------------------------------------------------------------------ #

    def _table_block(self, two_g, sheets, q):
        """omega_{two_g/2, m+q} with m fiber points on the given sheets and
        q abstract spectator slots; entries [(spec keys, LaurentForm)]."""
        m = len(sheets)
        sect = self.F.get((two_g, m + q))
        if sect is None:
            raise MissingDependencyError(two_g, m + q)
        out = {}
        cv = self.curve
        for keys, val in sect.items():
            for arr in _distinct_permutations(keys):
                form = None
                for a, k in zip(sheets, arr[:m]):
                    xi = cv.xi_minus(k).sheet_substitute(a)
                    form = xi if form is None else form * xi
                spec = arr[m:]
                cur = out.get(spec)
                term = form.map_coeffs(lambda c, v=val: c * v)
                out[spec] = term if cur is None else cur + term
        return [(k, f) for k, f in out.items() if f]

    def block_eval(self, two_g, sheets, q, primed):
        """One block of a W-combination.  Returns entries [(spec keys, form)]
        or None when the block is structurally excluded (omega01 in W').
        The (fiber + one spectator) omega_{0,2} block is NOT handled here:
        it is the one infinite family and is generated at fold time."""
        m = len(sheets)
        p = m + q
        if p == 1:
            if two_g == 0:
                if primed:
                    return None
                f = self.curve.omega01().sheet_substitute(sheets[0])
                return [((), f)] if f else []
            if two_g == 1:
                f = self.curve.omega_half().sheet_substitute(sheets[0])
                return [((), f)] if f else []
            return self._table_block(two_g, sheets, q)
        if p == 2 and two_g == 0:
            if m == 2:
                return [((), self._omega02_fiber_fiber(sheets[0], sheets[1]))]
            raise AssertionError("fiber-spectator omega02 handled at fold time")
        return self._table_block(two_g, sheets, q)

    def _omega02_fiber_fiber(self, a, b):
        """omega_{0,2}(theta^a z, theta^b z): a 2-form in z."""
        ctx = self.ctx
        za, zb = ctx.zeta(a), ctx.zeta(b)
        lead = (za * zb) * ((za - zb).inv() * (za - zb).inv())
        coeffs = {-2: lead}
        for (k, l), v in self.curve.f02.items():
            c = ctx.zeta(a * k + b * l).scalar_mul(v)
            m = k + l - 2
            cur = coeffs.get(m, ctx.zero()) + c
            if cur:
                coeffs[m] = cur
            else:
                coeffs.pop(m, None)
        return LaurentForm(ctx, coeffs, 2)

    def _block_cached(self, two_g, sheets, q, primed):
        key = (two_g, sheets, q, primed and two_g == 0 and len(sheets) + q == 1)
        if key not in self._block_memo:
            self._block_memo[key] = self.block_eval(two_g, sheets, q, primed)
        return self._block_memo[key]

    # ------------------------------------------------------------------ #
    # W-combinations                                                      #
    # ------------------------------------------------------------------ #

    def w_combination(self, two_g, sheets, n, primed, zcap=None, spec_cap=None):
        """W_{g,|sheets|,n} (unprimed) or W'_{g,|sheets|,n} (primed) as a
        tensor {spectator key tuple (len n): LaurentForm (formdeg |sheets|)}.

        zcap: drop z-exponents above it (caller guarantees irrelevance).
        spec_cap: cap for the infinite omega02 fiber-spectator key family
        when zcap is None (verifier mode).
        """
        i = len(sheets)
        result = {}
        for part in set_partitions(list(sheets)):
            two_g_total = two_g + 2 * len(part) - 2 * i
            if two_g_total < 0:
                continue
            for assign in product(range(len(part)), repeat=n):
                slots_of = [[] for _ in part]
                for slot, b in enumerate(assign):
                    slots_of[b].append(slot)
                for genera in compositions(two_g_total, len(part)):
                    term = self._eval_blocks(
                        part, slots_of, genera, n, primed, zcap, spec_cap
                    )
                    if term is None:
                        continue
                    for keys, form in term.items():
                        cur = result.get(keys)
                        result[keys] = form if cur is None else cur + form
        return {k: f for k, f in result.items() if f}

    def _eval_blocks(self, part, slots_of, genera, n, primed, zcap, spec_cap):
        """Product over blocks for one (partition, slot assignment, genus
        distribution); returns {full spec key tuple: form} or None."""
        if primed:
            # structural exclusion first, before any table lookups: a term
            # containing an omega_{0,1} singleton is absent from W'
            for bsheets, bslots, g2 in zip(part, slots_of, genera):
                if g2 == 0 and len(bsheets) == 1 and not bslots:
                    return None
        fixed = []  # (slots, entries) for finite blocks
        deferred = []  # (sheet, slot) for omega02 fiber-spectator blocks
        for bsheets, bslots, g2 in zip(part, slots_of, genera):
            if g2 == 0 and len(bsheets) == 1 and len(bslots) == 1:
                deferred.append((bsheets[0], bslots[0]))
                continue
            entries = self._block_cached(g2, tuple(bsheets), len(bslots), primed)
            if entries is None or not entries:
                return None
            fixed.append((tuple(bslots), entries))

        # exponent budget for the deferred infinite families
        if zcap is not None:
            budget = zcap
            minexps = []
            for _, entries in fixed:
                me = min(f.min_exp() for _, f in entries)
                minexps.append(me)
            total_min = sum(minexps)
            kcap_base = budget - total_min + 1
        else:
            if deferred and spec_cap is None:
                raise ValueError("spectator key cap required")
            kcap_base = spec_cap
            minexps = [None] * len(fixed)

        ctx = self.ctx
        # fold: partial entries {tuple sorted (slot,key): form}
        partial = {(): LaurentForm(ctx, {0: ctx.one()}, 0)}
        items = list(fixed)
        for a, slot in deferred:
            kcap = kcap_base if zcap is None else kcap_base  # same bound for each
            entries = []
            if kcap is not None and kcap >= 1:
                for k in range(1, kcap + 1):
                    entries.append(
                        (
                            (k,),
                            LaurentForm(
                                ctx, {k - 1: ctx.zeta(a * k).scalar_mul(Rat(k))}, 1
                            ),
                        )
                    )
            if not entries:
                return None
            items.append(((slot,), entries))
            minexps.append(0)

        for idx, (bslots, entries) in enumerate(items):
            remaining_min = sum(m for m in minexps[idx + 1 :] if m is not None) if zcap is not None else 0
            cap_here = None if zcap is None else zcap - remaining_min
            nxt = {}
            for pkeys, pform in partial.items():
                for bkeys, bform in entries.items() if isinstance(entries, dict) else entries:
                    f = pform.mul(bform, cap_here)
                    if not f:
                        continue
                    merged = tuple(sorted(pkeys + tuple(zip(bslots, bkeys))))
                    cur = nxt.get(merged)
                    nxt[merged] = f if cur is None else cur + f
            partial = nxt
            if not partial:
                return None

        out = {}
        for pkeys, form in partial.items():
            keys = [0] * n
            for slot, k in pkeys:
                keys[slot] = k
            out[tuple(keys)] = form
        return out

    # ------------------------------------------------------------------ #
    # the recursion                                                       #
    # ------------------------------------------------------------------ #

    def tr_step(self, two_g, n):
        """Compute the slot-resolved tensor for omega_{g,n+1} and store it."""
        if two_g - 2 + (n + 1) <= 0:
            raise ValueError("tr_step needs a stable target")
        cv = self.curve
        ctx = self.ctx
        r = cv.r
        acc = {}  # full key tuple (len n+1) -> CycNum

        nontrivial = list(range(1, r))
        for mask in range(1, 1 << len(nontrivial)):
            A = tuple(a for j, a in enumerate(nontrivial) if mask >> j & 1)
            d_form = None
            for a in A:
                fct = cv.kernel_denominator_factor(a)
                d_form = fct if d_form is None else d_form * fct
            d_min = d_form.min_exp()
            w = self.w_combination(
                two_g, (0,) + A, n, primed=True, zcap=d_min - 2
            )
            if not w:
                continue
            w_min = min(f.min_exp() for f in w.values())
            d_inv = d_form.invert(max_exp=-2 - w_min)
            for keys, form in w.items():
                f = form.mul(d_inv, max_exp=-2)
                if f.formdeg != 1:
                    raise RuntimeError(
                        "residue-degree-mismatch: got a %d-form" % f.formdeg
                    )
                for m, c in f.coeffs.items():
                    if m <= -2:
                        k0 = -m - 1
                        full = (k0,) + keys
                        cur = acc.get(full, ctx.zero()) - c
                        if cur:
                            acc[full] = cur
                        else:
                            acc.pop(full, None)

        if n == 0:
            # shift correction: +Res sum_i S_{i,2g} K^r (r dz/z)^i (-omega01)^{r-i}
            terms = {
                i: cv.shifts[(i, two_g)]
                for i in range(1, r + 1)
                if cv.shifts.get((i, two_g), RZERO)
            }
            if terms:
                neg_w01 = -cv.omega01()
                dxox = LaurentForm(ctx, {-1: ctx.scalar(Rat(r))}, 1)  # r dz/z
                d_form = None
                for a in range(1, r):
                    fct = cv.kernel_denominator_factor(a)
                    d_form = fct if d_form is None else d_form * fct
                for i, sval in sorted(terms.items()):
                    g_form = LaurentForm(ctx, {0: ctx.one()}, 0)
                    for _ in range(i):
                        g_form = g_form * dxox
                    for _ in range(r - i):
                        g_form = g_form * neg_w01
                    d_inv = d_form.invert(max_exp=-2 - g_form.min_exp())
                    h = g_form.mul(d_inv, max_exp=-2)
                    if h.formdeg != 1:
                        raise RuntimeError("residue-degree-mismatch in shift term")
                    for m, c in h.coeffs.items():
                        if m <= -2:
                            k0 = -m - 1
                            cur = acc.get((k0,), ctx.zero()) + c.scalar_mul(sval)
                            if cur:
                                acc[(k0,)] = cur
                            else:
                                acc.pop((k0,), None)

        if self.strict:
            for full, v in acc.items():
                if not v.is_rational():
                    raise RuntimeError(
                        "irrational correlator at (2g=%d, n=%d)%r: %r"
                        % (two_g, n + 1, full, v)
                    )
        self.G[(two_g, n + 1)] = acc
        self.F[(two_g, n + 1)] = {
            k: v for k, v in acc.items() if tuple(sorted(k)) == k
        }
        return acc

    def run(self, chi_max):
        """Fill all sectors with 0 < 2g-2+n <= chi_max, deterministic order."""
        for chi in range(self.chi_done + 1, chi_max + 1):
            for n in range(1, chi + 3):
                two_g = chi + 2 - n
                if two_g < 0:
                    continue
                self.tr_step(two_g, n - 1)
        self.chi_done = max(self.chi_done, chi_max)
        return self

    def export_table(self):
        from .series import CorrelatorTable
        from .exact import rat_to_str

        cv = self.curve
        t = CorrelatorTable(
            cv.r,
            cv.s,
            dict(cv.shifts),
            {
                "f01": {str(k): rat_to_str(v) for k, v in sorted(cv.f01.items())},
                "f12": {str(k): rat_to_str(v) for k, v in sorted(cv.f12.items())},
                "f02": [
                    {"k": k, "l": l, "value": rat_to_str(v)}
                    for (k, l), v in sorted(cv.f02.items())
                    if k <= l
                ],
            },
            self.chi_done,
        )
        for (two_g, n), sect in self.F.items():
            t.mark_computed(two_g, n)
            for keys, v in sect.items():
                t.set(two_g, n, keys, v.rational_of())
        return t

    # ------------------------------------------------------------------ #
    # verifiers                                                           #
    # ------------------------------------------------------------------ #

    def _deferred_entries(self, a, kcap):
        """The omega_{0,2}(theta^a z, spectator) family up to key kcap."""
        memo = self._defer_memo
        got = memo.get((a, kcap))
        if got is None:
            ctx = self.ctx
            got = [
                ((k,), LaurentForm(ctx, {k - 1: ctx.zeta(a * k).scalar_mul(Rat(k))}, 1))
                for k in range(1, kcap + 1)
            ]
            memo[(a, kcap)] = got
        return got

    def _w_subset(self, mask, e, smask, primed, spec_cap):
        """Sum over collections of disjoint blocks partitioning the sheet set
        `mask`, with slot set `smask` distributed among the blocks and the
        genus budget sum(2 g_B - 2 + 2 #sheets_B) = e.  Returns a tensor
        {sorted ((slot, key), ..): LaurentForm}.

        This is the same object w_combination builds per partition, but
        organized as a subset DP (blocks keyed by their minimal sheet) so
        partial products are shared across partitions and across sectors.
        """
        memo = self._dp_memo
        key = (mask, e, smask, primed, spec_cap)
        got = memo.get(key)
        if got is not None:
            return got
        ctx = self.ctx
        if mask == 0:
            got = {(): LaurentForm(ctx, {0: ctx.one()}, 0)} if e == 0 and smask == 0 else {}
            memo[key] = got
            return got
        low = mask & -mask
        a0 = low.bit_length() - 1
        rest0 = mask ^ low
        out = {}
        # slot submasks of smask, with their sorted slot lists
        slotsubs = []
        tau = smask
        while True:
            slots = tuple(j for j in range(smask.bit_length()) if tau >> j & 1)
            slotsubs.append((tau, slots))
            if tau == 0:
                break
            tau = (tau - 1) & smask
        sub = rest0
        while True:
            bmask = sub | low
            bsheets = tuple(j for j in range(self.curve.r) if bmask >> j & 1)
            p = len(bsheets)
            restmask = mask ^ bmask
            for tau, slots in slotsubs:
                q = len(slots)
                two_gb = 0
                while two_gb + 2 * p - 2 <= e:
                    eb = two_gb + 2 * p - 2
                    if eb < 0:
                        two_gb += 1
                        continue
                    if two_gb == 0 and p == 1 and q == 1:
                        entries = self._deferred_entries(bsheets[0], spec_cap)
                    else:
                        entries = self._block_cached(two_gb, bsheets, q, primed)
                    if entries:
                        rest_t = self._w_subset(restmask, e - eb, smask ^ tau, primed, spec_cap)
                        if rest_t:
                            if isinstance(entries, dict):
                                entries = list(entries.items())
                            for bkeys, bform in entries:
                                pairs = tuple(zip(slots, bkeys))
                                for pkeys, pform in rest_t.items():
                                    f = bform.mul(pform)
                                    if not f:
                                        continue
                                    merged = tuple(sorted(pkeys + pairs))
                                    cur = out.get(merged)
                                    out[merged] = f if cur is None else cur + f
                    two_gb += 1
            if sub == 0:
                break
            sub = (sub - 1) & rest0
        got = {k: f for k, f in out.items() if f}
        memo[key] = got
        return got

    def _w_subset_keys(self, mask, two_g, n, primed, spec_cap):
        """W_{g,popcount(mask),n} on the sheet set `mask`, as
        {spectator key tuple (len n): LaurentForm}."""
        smask = (1 << n) - 1
        t = self._w_subset(mask, two_g, smask, primed, spec_cap)
        out = {}
        for pkeys, form in t.items():
            keys = [0] * n
            for slot, k in pkeys:
                keys[slot] = k
            kk = tuple(keys)
            cur = out.get(kk)
            out[kk] = form if cur is None else cur + form
        return out

    def _spec_key_cap(self):
        mx = 0
        for sect in self.F.values():
            for keys in sect:
                if keys:
                    mx = max(mx, max(keys))
        return mx + self.curve.r + self.curve.s

    def e_combination(self, i, two_g, n, spec_cap):
        """E^i_{g,n}: sum over i-element sheet subsets of the full fiber."""
        result = {}
        for mask in range(1, 1 << self.curve.r):
            if mask.bit_count() != i:
                continue
            w = self._w_subset_keys(mask, two_g, n, False, spec_cap)
            for keys, form in w.items():
                cur = result.get(keys)
                result[keys] = form if cur is None else cur + form
        return {k: f for k, f in result.items() if f}

    def verify_symmetry(self):
        rep = Report("symmetry")
        for (two_g, n), sect in sorted(self.G.items()):
            zero = self.ctx.zero()
            for keys, val in sect.items():
                canon = tuple(sorted(keys))
                if sect.get(canon, zero) != val:
                    rep.fail(
                        ("2g=%d" % two_g, "n=%d" % n, keys),
                        "value differs from canonical arrangement",
                    )
        return rep

    def verify_identity(self):
        """Combinatorial identity sum_{z in Z subset f(z)} W' prod_(f\\Z) (..)
        = sum_i E^i (-omega01)^(r-i), per computed sector, per spectator key."""
        rep = Report("combinatorial-identity")
        cv = self.curve
        r = cv.r
        spec_cap = self._spec_key_cap()
        neg_w01 = -cv.omega01()
        factors = {a: cv.kernel_denominator_factor(a) for a in range(1, r)}
        for (two_g, n1) in sorted(self.G):
            n = n1 - 1
            lhs = {}
            for mask in range(1, 1 << r, 2):  # sheet 0 (z itself) always in Z
                w = self._w_subset_keys(mask, two_g, n, True, spec_cap)
                if not w:
                    continue
                cform = LaurentForm(self.ctx, {0: self.ctx.one()}, 0)
                for a in range(1, r):
                    if not mask >> a & 1:
                        cform = cform * factors[a]
                for keys, form in w.items():
                    t = form * cform
                    cur = lhs.get(keys)
                    lhs[keys] = t if cur is None else cur + t
            rhs = {}
            for i in range(1, r + 1):
                e = self.e_combination(i, two_g, n, spec_cap)
                pw = LaurentForm(self.ctx, {0: self.ctx.one()}, 0)
                for _ in range(r - i):
                    pw = pw * neg_w01
                for keys, form in e.items():
                    t = form * pw
                    cur = rhs.get(keys)
                    rhs[keys] = t if cur is None else cur + t
            allkeys = set(lhs) | set(rhs)
            zero = LaurentForm.zero(self.ctx, r)
            for keys in sorted(allkeys):
                diff = lhs.get(keys, zero) - rhs.get(keys, zero)
                if any(k > spec_cap for k in keys):
                    continue  # outside the exact window of the capped family
                if diff:
                    rep.fail(
                        ("2g=%d" % two_g, "n=%d" % n, keys),
                        {m: repr(c) for m, c in sorted(diff.coeffs.items())},
                    )
        return rep

    def verify_symmetry_and_identity(self):
        rep = Report("symmetry+identity")
        for sub in (self.verify_symmetry(), self.verify_identity()):
            rep.failures.extend(
                {"location": (sub.check,) + tuple(f["location"]), "witness": f["witness"]}
                for f in sub.failures
            )
        return rep

    def verify_loop_equations(self, chi_max=None):
        """Shifted loop equations plus the exact i=1 statement.

        E^i_{g,n} - delta_{n,0} S_{i,2g} (dx/x)^i must vanish to order
        x^(floor(s(i-1)/r)+1) (dx/x)^i; deck-invariance forces exponents
        = 0 mod r after dividing by (r dz/z)^i.  Checked for every sector
        whose dependencies are inside the computed table: unstable sectors
        and all (2g,n) with 2g-2+n <= chi_done - 1.
        """
        rep = Report("loop-equations")
        cv = self.curve
        r, s = cv.r, cv.s
        spec_cap = self._spec_key_cap()
        limit = (chi_max if chi_max is not None else self.chi_done) - 1
        sectors = [(0, 0), (1, 0), (0, 1)]
        for chi in range(1, limit + 1):
            for n in range(0, chi + 3):
                two_g = chi + 2 - n
                if two_g >= 0:
                    sectors.append((two_g, n))
        for (two_g, n) in sectors:
            for i in range(1, r + 1):
                e = self.e_combination(i, two_g, n, spec_cap)
                if n == 0:
                    sval = cv.shifts.get((i, two_g), RZERO) if two_g >= 1 else RZERO
                    if sval:
                        dxox_i = LaurentForm(
                            self.ctx, {-i: self.ctx.scalar(Rat(r) ** i * sval)}, i
                        )
                        cur = e.get((), LaurentForm.zero(self.ctx, i))
                        e[()] = cur - dxox_i
                need = r * ((s * (i - 1)) // r + 1)
                for keys, form in sorted(e.items()):
                    if any(k > spec_cap for k in keys):
                        continue
                    # divide by (r dz/z)^i: shift exponents up by i, drop r^i
                    for m, c in form.coeffs.items():
                        mm = m + i
                        if mm % r != 0 or mm < need:
                            if c:
                                rep.fail(
                                    ("i=%d" % i, "2g=%d" % two_g, "n=%d" % n, keys),
                                    {"z-exponent": m, "coefficient": repr(c)},
                                )
                # Lemma-style exact i=1 statement
                if i == 1:
                    expected = {}
                    if n == 0:
                        sval = cv.shifts.get((1, two_g), RZERO) if two_g >= 1 else RZERO
                        if two_g == 0:
                            # E^1_{0,0} = sum_a omega01(theta^a z): survives only
                            # on F01 indices divisible by r
                            exp0 = {
                                k - 1: self.ctx.scalar(v * Rat(r))
                                for k, v in cv.f01.items()
                                if k % r == 0
                            }
                            expected[()] = LaurentForm(self.ctx, exp0, 1)
                        else:
                            exp0 = {-1: self.ctx.scalar(sval * Rat(r))} if sval else {}
                            if two_g == 1:
                                # deformation tail of omega_{1/2,1} survives the
                                # sheet sum on indices divisible by r
                                for k, v in cv.f12.items():
                                    if k % r == 0:
                                        exp0[k - 1] = self.ctx.scalar(v * Rat(r))
                            expected[()] = LaurentForm(self.ctx, exp0, 1)
                    elif (two_g, n) == (0, 1):
                        for k in range(1, spec_cap + 1):
                            if k % r == 0:
                                expected[(k,)] = LaurentForm(
                                    self.ctx,
                                    {k - 1: self.ctx.scalar(Rat(r * k))},
                                    1,
                                )
                    elif cv.f02:
                        # stable sectors: the principal parts of the sheet-summed
                        # xi_{-k0} cancel (that is the content of the check), but
                        # the deformation tails survive on r-divisible indices
                        for full, v in self.G.get((two_g, n + 1), {}).items():
                            k0, keys = full[0], full[1:]
                            tail = {}
                            for (kk, l), c in cv.f02.items():
                                if kk == k0 and l % r == 0:
                                    m = l - 1
                                    tail[m] = tail.get(m, RZERO) + c * Rat(r, k0)
                            if tail:
                                lf = LaurentForm(
                                    self.ctx,
                                    {m: v.scalar_mul(c) for m, c in tail.items()},
                                    1,
                                )
                                cur = expected.get(keys, LaurentForm.zero(self.ctx, 1))
                                expected[keys] = cur + lf
                    # undeformed stable sectors with n >= 1: exactly zero
                    e1 = self.e_combination(1, two_g, n, spec_cap)
                    allkeys = set(e1) | set(expected)
                    zero = LaurentForm.zero(self.ctx, 1)
                    for keys in sorted(allkeys):
                        if any(k > spec_cap for k in keys):
                            continue
                        diff = e1.get(keys, zero) - expected.get(keys, zero)
                        if diff:
                            rep.fail(
                                ("E1-exact", "2g=%d" % two_g, "n=%d" % n, keys),
                                {m: repr(c) for m, c in sorted(diff.coeffs.items())},
                            )
        return rep


def run_curve(curve, chi_max, strict=True):
    state = RecursionState(curve, strict=strict)
    state.run(chi_max)
    return state


def state_from_table(curve, table, strict=True):
    """Rebuild a verifier-ready state from a serialized correlator table.

    The slot-resolved tensors are symmetrized from the canonical entries, so
    verify_symmetry is vacuous on imported data; loop equations, the string
    identity and downstream consumers see exactly the stored values.
    """
    state = RecursionState(curve, strict=strict)
    ctx = state.ctx
    for (two_g, n) in table.sectors():
        sect = table.section(two_g, n)
        acc = {}
        canon = {}
        for keys, v in sect.items():
            cv = ctx.scalar(v)
            canon[tuple(keys)] = cv
            for perm in set(permutations(keys)):
                acc[perm] = cv
        state.G[(two_g, n)] = acc
        state.F[(two_g, n)] = canon
        state.chi_done = max(state.chi_done, two_g - 2 + n)
    return state
