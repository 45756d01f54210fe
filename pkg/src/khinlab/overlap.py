"""Pairwise overlaps of E_m^D and E_n^D, quasi-independence sums and the
second Borel-Cantelli lower bound.

Two independent routes compute a pair overlap:

* ``intersect_pair`` materialises both sets and sweeps them, attributing
  every intersection piece to its source pair of centres ``(r/m, s/n)``.
* ``pair_overlap`` counts centre differences arithmetically. Writing the
  admissibility indicator ``[gcd(r, m) <= D]`` as a Moebius combination of
  divisibility indicators ``[k | r]`` turns the count of centre pairs at each
  distance into a lattice count, and the overlap becomes a finite sum of
  tent functions over arithmetic progressions. It costs O(#weights^2) per
  pair instead of O(m + n) and drives the N^2 sums.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from . import numtheory as nt
from .approxsets import PsiSpec, ReductionPolicy, centers, fmt_q, measure_E
from .realarith import fmt_rational, mpf, precision, working_precision

DEFAULT_PAIR_CAP = 5000
REL_TOL_EXP = -80


@dataclass(frozen=True)
class OverlapReport:
    m: int
    n: int
    gcd_mn: int
    total: Fraction
    b1: Fraction
    b2: Fraction
    b2_closed_form: Fraction
    b1_bound: Fraction
    coinciding_centers: int
    b2_forced_zero: bool

    @property
    def violations(self) -> list[str]:
        bad = []
        if self.b1 + self.b2 != self.total:
            bad.append("b1 + b2 != total")
        if not 0 <= self.b1 <= self.b1_bound:
            bad.append("b1 outside [0, 8 psi(m) psi(n)]")
        if self.b2_forced_zero and self.b2 != 0:
            bad.append("b2 nonzero although gcd(m, n) < n / D(n)")
        if self.b2 != self.b2_closed_form:
            bad.append("b2 attribution disagrees with closed form")
        return bad

    CSV_HEADER = "m,n,gcd,total,b1,b2,b1_bound,coinciding_centers,b2_forced_zero"

    def csv_row(self) -> str:
        q = fmt_rational
        return (
            f"{self.m},{self.n},{self.gcd_mn},{q(self.total)},{q(self.b1)},{q(self.b2)},"
            f"{q(self.b1_bound)},{self.coinciding_centers},{str(self.b2_forced_zero).lower()}"
        )

    def as_dict(self) -> dict:
        q = fmt_q
        return {
            "m": self.m,
            "n": self.n,
            "gcd": self.gcd_mn,
            "total": q(self.total),
            "b1": q(self.b1),
            "b2": q(self.b2),
            "b2_closed_form": q(self.b2_closed_form),
            "b1_bound": q(self.b1_bound),
            "coinciding_centers": self.coinciding_centers,
            "b2_forced_zero": self.b2_forced_zero,
        }


def b2_forced_zero(m: int, n: int, policy: ReductionPolicy) -> bool:
    """gcd(m, n) < n / D(n): no admissible centre of E_n can coincide with one of E_m."""
    return math.gcd(m, n) * policy.cut(n) < n


def coinciding_count(m: int, n: int, policy: ReductionPolicy) -> int:
    """Number of admissible centre pairs with r/m = s/n.

    The common centres are k/g (g = gcd(m, n)); the one for k has
    gcd(r, m) = (m/g) gcd(k, g) and gcd(s, n) = (n/g) gcd(k, g).
    """
    g = math.gcd(m, n)
    mp, np_ = m // g, n // g
    dm, dn = policy.cut(m), policy.cut(n)
    count = 0
    for k in range(1, g + 1):
        h = math.gcd(k, g)
        if mp * h <= dm and np_ * h <= dn:
            count += 1
    return count


def intersect_pair(m: int, n: int, psi: PsiSpec, policy: ReductionPolicy) -> OverlapReport:
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    pm, pn = psi(m), psi(n)
    g = math.gcd(m, n)
    forced = b2_forced_zero(m, n, policy)
    b1_bound = 8 * pm * pn
    if pm == 0 or pn == 0:
        z = Fraction(0)
        return OverlapReport(m, n, g, z, z, z, z, b1_bound, 0, forced)

    # common scale: centre r/m -> r*n*qm*qn, radius psi(m)/m -> pm.num*n*qn
    qm, qn = pm.denominator, pn.denominator
    den = m * n * qm * qn
    ra = pm.numerator * n * qn
    rb = pn.numerator * m * qm
    a_cent = [r * n * qm * qn for r in centers(m, policy).tolist()]
    s_list = centers(n, policy).tolist()
    # lifts by -1, 0, +1 cover every overlap with A's intervals, which sit in (0, 3/2)
    b_cent = [(s % n, (s + j * n) * m * qm * qn) for j in (-1, 0, 1) for s in s_list]

    b1 = b2 = 0
    coinciding = 0
    i = j = 0
    while i < len(a_cent) and j < len(b_cent):
        ca = a_cent[i]
        cb = b_cent[j][1]
        lo = max(ca - ra, cb - rb)
        hi = min(ca + ra, cb + rb)
        if lo < hi:
            if ca == cb:
                b2 += hi - lo
                coinciding += 1
            else:
                b1 += hi - lo
        if ca + ra < cb + rb:
            i += 1
        else:
            j += 1

    width = 2 * min(pm / m, pn / n)
    closed = coinciding_count(m, n, policy) * width
    return OverlapReport(
        m, n, g, Fraction(b1 + b2, den), Fraction(b1, den), Fraction(b2, den), closed,
        b1_bound, coinciding, forced,
    )


# --------------------------------------------------------------------------
# arithmetic route


@lru_cache(maxsize=1 << 16)
def _weights(m: int, cut: int) -> tuple[tuple[int, int], ...]:
    """(k, w) with [gcd(r, m) <= cut] = sum_k w [k | r] over k | m, w != 0."""
    if cut >= m:
        return ((1, 1),)
    out = []
    for k in nt.divisors(m):
        w = sum(nt.moebius(k // d) for d in nt.divisors_up_to(k, cut))
        if w:
            out.append((k, w))
    return tuple(out)


def _pair_overlap_scaled(m, n, pm, qm, pn, qn, wm, wn):
    """(b1_num, b2_num, Q) with the overlap pieces equal to num / Q."""
    g = math.gcd(m, n)
    mp, np_ = m // g, n // g
    L = g * mp * np_
    Q = L * qm * qn
    A = pm * qn * np_  # psi(m)/m in units of 1/Q
    B = pn * qm * mp  # psi(n)/n in units of 1/Q
    s = A + B
    w0 = 2 * min(A, B)
    h = abs(A - B)
    qq = qm * qn
    c0 = 0
    tail = 0
    for k1, w1 in wm:
        a = k1 * np_
        for k2, w2 in wn:
            G = math.gcd(a, k2 * mp, L)
            mult = w1 * w2 * (g * G // (k1 * k2))
            c0 += mult
            U = G * qq
            j1 = h // U
            j2 = (s - 1) // U
            part = j1 * w0 + (j2 - j1) * s - U * (j2 * (j2 + 1) - j1 * (j1 + 1)) // 2
            tail += mult * part
    return 2 * tail, c0 * w0, Q


def pair_overlap(m: int, n: int, psi: PsiSpec, policy: ReductionPolicy) -> tuple[Fraction, Fraction]:
    """(b1, b2) for lambda(E_m^D cap E_n^D), m != n, by exact counting."""
    if m == n:
        raise ValueError("pair_overlap needs m != n")
    pm, pn = psi(m), psi(n)
    if pm == 0 or pn == 0:
        return Fraction(0), Fraction(0)
    b1, b2, Q = _pair_overlap_scaled(
        m, n, pm.numerator, pm.denominator, pn.numerator, pn.denominator,
        _weights(m, policy.cut(m)), _weights(n, policy.cut(n)),
    )
    return Fraction(b1, Q), Fraction(b2, Q)


class _Accumulator:
    """Exact sum of many num/den terms; numerators are pooled per denominator."""

    def __init__(self):
        self.by_den: dict[int, int] = defaultdict(int)

    def add(self, num: int, den: int) -> None:
        if num:
            self.by_den[den] += num

    def add_fraction(self, x: Fraction) -> None:
        self.add(x.numerator, x.denominator)

    def value(self) -> Fraction:
        if not self.by_den:
            return Fraction(0)
        lcd = math.lcm(*self.by_den)
        return Fraction(sum(num * (lcd // den) for den, num in self.by_den.items()), lcd)


# --------------------------------------------------------------------------
# sums over 1 <= m, n <= N


@dataclass(frozen=True)
class OverlapSums:
    N: int
    S1: Fraction  # sum of lambda(E_n)
    S2: Fraction  # sum over ordered pairs incl. diagonal
    offdiag_b1: Fraction  # 2 * sum_{m<n} b1
    offdiag_b2: Fraction  # 2 * sum_{m<n} b2
    sum_psi: Fraction
    pairs_with_b2: int
    b1_exact: bool = True


def _active(N: int, psi: PsiSpec) -> list[tuple[int, int, int]]:
    hint = psi.support_hint(N)
    ns = range(1, N + 1) if hint is None else [k for k in hint if k >= 1]
    out = []
    for n in ns:
        v = psi(n)
        if v:
            out.append((n, v.numerator, v.denominator))
    return out


def _pairs_block(args):
    """Sum pair overlaps for n in a block against all active m < n."""
    active, lo, hi, policy = args
    acc1, acc2 = _Accumulator(), _Accumulator()
    with_b2 = 0
    weights = [_weights(n, policy.cut(n)) for n, _, _ in active]
    for j in range(lo, hi):
        n, pn, qn = active[j]
        wn = weights[j]
        for i in range(j):
            m, pm, qm = active[i]
            b1, b2, Q = _pair_overlap_scaled(m, n, pm, qm, pn, qn, weights[i], wn)
            acc1.add(b1, Q)
            if b2:
                acc2.add(b2, Q)
                with_b2 += 1
    return dict(acc1.by_den), dict(acc2.by_den), with_b2


def overlap_sums(
    N: int,
    psi: PsiSpec,
    policy: ReductionPolicy,
    workers: int = 1,
    pair_cap: int = DEFAULT_PAIR_CAP,
) -> OverlapSums:
    """S1 and S2 over 1 <= m, n <= N, exact.

    Above ``pair_cap`` only divisor-linked pairs (the only ones that can have
    coinciding centres) are computed; b1 is then replaced by 8 psi(m) psi(n)
    and the result is flagged ``b1_exact=False``.
    """
    active = _active(N, psi)
    s1 = _Accumulator()
    spsi = _Accumulator()
    for n, p, q in active:
        s1.add_fraction(measure_E(n, psi, policy))
        spsi.add(p, q)
    if N > pair_cap:
        return _capped_sums(N, psi, policy, active, s1.value(), spsi.value())

    S1 = s1.value()
    if _fits_int64(active, policy):
        b1, b2, with_b2 = _pairs_vectorized(active, policy)
        return OverlapSums(N, S1, S1 + 2 * b1 + 2 * b2, 2 * b1, 2 * b2, spsi.value(), with_b2)

    acc1, acc2 = _Accumulator(), _Accumulator()
    blocks = _balanced_blocks(len(active), max(1, workers) * 4)
    jobs = [(active, lo, hi, policy) for lo, hi in blocks]
    if workers > 1 and len(active) > 200:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_pairs_block, jobs))
    else:
        results = [_pairs_block(job) for job in jobs]
    with_b2 = 0
    for d1, d2, c in results:
        for den, num in d1.items():
            acc1.add(num, den)
        for den, num in d2.items():
            acc2.add(num, den)
        with_b2 += c
    b1, b2 = 2 * acc1.value(), 2 * acc2.value()
    return OverlapSums(N, S1, S1 + b1 + b2, b1, b2, spsi.value(), with_b2)


def _fits_int64(active, policy) -> bool:
    """Whether every intermediate of the vectorized pair formula stays below 2**62."""
    if not active:
        return True
    N = max(n for n, _, _ in active)
    qmax = max(q for _, _, q in active)
    ws = [_weights(n, policy.cut(n)) for n, _, _ in active]
    wmax = max(abs(w) for wn in ws for _, w in wn)
    tmax = max(len(wn) for wn in ws)
    # each term is at most w^2 * m n * q^2 N^2, summed over tmax^2 weight pairs
    return N**4 * qmax**2 * wmax**2 * tmax**2 < 2**62


def _pairs_vectorized(active, policy) -> tuple[Fraction, Fraction, int]:
    """sum_{m<n} (b1, b2) with numpy int64 arithmetic, one n at a time.

    Same formula as ``_pair_overlap_scaled``; the (m, k1) weight terms of all
    m < n are laid out flat and reduced per m with ``reduceat``.
    """
    flat_m, flat_p, flat_q, flat_k, flat_w, starts = [], [], [], [], [], []
    for n, p, q in active:
        starts.append(len(flat_m))
        for k, w in _weights(n, policy.cut(n)):
            flat_m.append(n)
            flat_p.append(p)
            flat_q.append(q)
            flat_k.append(k)
            flat_w.append(w)
    starts.append(len(flat_m))
    M = np.array(flat_m, dtype=np.int64)
    P = np.array(flat_p, dtype=np.int64)
    Qd = np.array(flat_q, dtype=np.int64)
    K = np.array(flat_k, dtype=np.int64)
    W = np.array(flat_w, dtype=np.int64)
    seg = np.array(starts, dtype=np.int64)

    dens, num1, num2 = [], [], []
    with_b2 = 0
    for j in range(1, len(active)):
        n, pn, qn = active[j]
        end = starts[j]
        m, pm, qm, k1, w1 = M[:end], P[:end], Qd[:end], K[:end], W[:end]
        g = np.gcd(m, n)
        mp = m // g
        np_ = n // g
        L = m * np_
        A = pm * qn * np_
        B = pn * qm * mp
        s = A + B
        w0 = 2 * np.minimum(A, B)
        h = np.abs(A - B)
        qq = qm * qn
        a = k1 * np_
        tail = np.zeros(end, dtype=np.int64)
        c0 = np.zeros(end, dtype=np.int64)
        for k2, w2 in _weights(n, policy.cut(n)):
            G = np.gcd(np.gcd(a, k2 * mp), L)
            mult = w1 * w2 * (g * G // (k1 * k2))
            U = G * qq
            j1 = h // U
            j2 = (s - 1) // U
            part = j1 * w0 + (j2 - j1) * s - U * ((j2 * (j2 + 1) - j1 * (j1 + 1)) // 2)
            tail += mult * part
            c0 += mult
        first = seg[:j]
        t_m = np.add.reduceat(tail, first)
        c_m = np.add.reduceat(c0, first)
        Q_m = (L * qq)[first]
        dens.append(Q_m)
        num1.append(2 * t_m)
        num2.append(c_m * w0[first])
        with_b2 += int(np.count_nonzero(c_m))
    if not dens:
        return Fraction(0), Fraction(0), 0
    dens = np.concatenate(dens)
    uniq, inv = np.unique(dens, return_inverse=True)
    out = []
    for nums in (np.concatenate(num1), np.concatenate(num2)):
        tot = np.zeros(len(uniq), dtype=np.int64)
        np.add.at(tot, inv, nums)
        acc = _Accumulator()
        for den, num in zip(uniq.tolist(), tot.tolist()):
            acc.add(num, den)
        out.append(acc.value())
    return out[0], out[1], with_b2


def _balanced_blocks(count: int, parts: int) -> list[tuple[int, int]]:
    # work for index j grows like j, so cut at sqrt-spaced points
    if count == 0:
        return []
    cuts = sorted({0, count} | {int(count * math.sqrt(k / parts)) for k in range(1, parts)})
    return [(a, b) for a, b in zip(cuts, cuts[1:]) if b > a]


def _capped_sums(N, psi, policy, active, S1, sum_psi) -> OverlapSums:
    acc2 = _Accumulator()
    with_b2 = 0
    for n, pn, qn in active:
        dn = policy.cut(n)
        seen = set()
        for d in nt.divisors_up_to(n, dn):
            step = n // d
            for m in range(step, n, step):
                if m in seen:
                    continue
                seen.add(m)
                pm = psi(m)
                if pm == 0:
                    continue
                b2 = coinciding_count(m, n, policy) * 2 * min(pm / m, psi(n) / n)
                if b2:
                    acc2.add_fraction(b2)
                    with_b2 += 1
    b1_bound = 8 * (sum_psi * sum_psi - sum(Fraction(p, q) ** 2 for _, p, q in active))
    b2 = 2 * acc2.value()
    return OverlapSums(N, S1, S1 + b1_bound + b2, b1_bound, b2, sum_psi, with_b2, b1_exact=False)


# --------------------------------------------------------------------------
# quasi-independence and Borel-Cantelli


@dataclass(frozen=True)
class QuasiIndependence:
    sums: OverlapSums
    eps: Fraction
    log_term: mpmath.mpf  # sum psi(n) (ln n)^(eps/2)
    explicit_bound: mpmath.mpf  # (8*20^2/eps^2 + 1) S1^2 + 4 log_term
    direct_bound: mpmath.mpf  # 8 (sum psi)^2 + 4 log_term + S1
    partial_summation_rhs: mpmath.mpf  # (ln N)^(eps/2) sum psi
    holds: bool
    direct_holds: bool
    partial_summation_holds: bool
    precision_bits: int

    @property
    def ratio(self) -> Fraction | None:
        """Observed S2 / S1^2."""
        s = self.sums
        return s.S2 / s.S1**2 if s.S1 else None


def _le(x, y) -> bool:
    return x <= y * (1 + mpmath.ldexp(1, REL_TOL_EXP)) if y > 0 else x <= y


def quasi_independence(
    N: int,
    psi: PsiSpec,
    policy: ReductionPolicy,
    eps: Fraction,
    workers: int = 1,
    pair_cap: int = DEFAULT_PAIR_CAP,
) -> QuasiIndependence:
    sums = overlap_sums(N, psi, policy, workers=workers, pair_cap=pair_cap)
    bits = precision()
    with working_precision(bits):
        half = mpf(eps) / 2
        log_term = mpmath.mpf(0)
        for n, p, q in _active(N, psi):
            if n > 1:
                log_term += mpf(Fraction(p, q)) * mpmath.log(n) ** half
        s1, s2 = mpf(sums.S1), mpf(sums.S2)
        const = 8 * mpf(20) ** 2 / mpf(eps) ** 2 + 1
        bound = const * s1**2 + 4 * log_term
        first = 8 * mpf(sums.sum_psi) ** 2 + 4 * log_term + s1
        psum_rhs = mpmath.log(N) ** half * mpf(sums.sum_psi) if N > 1 else mpmath.mpf(0)
        return QuasiIndependence(
            sums, eps, log_term, bound, first, psum_rhs,
            _le(s2, bound), _le(s2, first), _le(log_term, psum_rhs), bits,
        )


@dataclass(frozen=True)
class BorelCantelli:
    N: int
    S1: Fraction
    S2: Fraction
    ratio: Fraction  # S1^2 / S2
    union: Fraction  # exact lambda of the union over n <= N
    ratio_le_union: bool
    union_le_bound: bool  # union <= min(1, S1)


def borel_cantelli_bound(
    N: int, psi: PsiSpec, policy: ReductionPolicy, workers: int = 1
) -> BorelCantelli:
    if N < 1:
        raise ValueError("N must be >= 1")
    sums = overlap_sums(N, psi, policy, workers=workers)
    if sums.S1 == 0:
        raise ValueError("all measures vanish; S1^2/S2 is undefined")
    if not sums.b1_exact:
        raise ValueError("Borel-Cantelli ratio needs exact S2; raise pair_cap")
    ratio = sums.S1**2 / sums.S2
    u = union_measure(1, N, psi, policy)
    return BorelCantelli(N, sums.S1, sums.S2, ratio, u, ratio <= u, u <= min(Fraction(1), sums.S1))


# --------------------------------------------------------------------------
# truncated unions


def union_measure(M: int, N: int, psi: PsiSpec, policy: ReductionPolicy) -> Fraction:
    """Exact lambda of the union of E_n^D for M <= n <= N by one global sweep."""
    if not 1 <= M <= N:
        raise ValueError("need 1 <= M <= N")
    metas = []  # (n, p, q)
    owner, nums = [], []
    for n in range(M, N + 1):
        v = psi(n)
        if v == 0:
            continue
        a = centers(n, policy)
        if len(a) and a[-1] == n:
            # the centre 1 ~ 0 also covers (0, psi/n)
            a = np.concatenate(([0], a))
        owner.append(np.full(len(a), len(metas), dtype=np.int64))
        nums.append(a)
        metas.append((n, v.numerator, v.denominator))
    if not metas:
        return Fraction(0)
    owner = np.concatenate(owner)
    a_all = np.concatenate(nums)
    meta_n = np.array([float(n) for n, _, _ in metas])
    meta_r = np.array([p / q for _, p, q in metas])  # float radius * n
    keys = np.maximum((a_all - meta_r[owner]) / meta_n[owner], 0.0)
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    # runs of near-equal float keys are re-sorted exactly
    close = np.flatnonzero(np.diff(keys) <= 1e-12)
    order = order.tolist()
    if len(close):
        starts = close[np.r_[True, np.diff(close) > 1]]
        ends = close[np.r_[np.diff(close) > 1, True]] + 2
        for s, e in zip(starts.tolist(), ends.tolist()):
            group = order[s:e]
            group.sort(key=lambda i: _lo_exact(metas[owner[i]], int(a_all[i])))
            order[s:e] = group

    owner_l = owner.tolist()
    a_l = a_all.tolist()
    acc_hi, acc_lo = _Accumulator(), _Accumulator()
    cur = None  # [lo_num, lo_den, hi_num, hi_den]
    for i in order:
        n, p, q = metas[owner_l[i]]
        a = a_l[i]
        den = n * q
        lo = max(a * q - p, 0)
        hi = min(a * q + p, den)
        if cur is not None and lo * cur[3] <= cur[2] * den:
            if hi * cur[3] > cur[2] * den:
                cur[2], cur[3] = hi, den
            continue
        if cur is not None:
            acc_lo.add(cur[0], cur[1])
            acc_hi.add(cur[2], cur[3])
        cur = [lo, den, hi, den]
    acc_lo.add(cur[0], cur[1])
    acc_hi.add(cur[2], cur[3])
    return acc_hi.value() - acc_lo.value()


def _lo_exact(meta, a) -> Fraction:
    n, p, q = meta
    return Fraction(max(a * q - p, 0), n * q)
