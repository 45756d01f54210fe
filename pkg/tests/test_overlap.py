import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from khinlab import overlap as ov
from khinlab.approxsets import Const, Coprime, FixedCut, Full, LogPower, Power, PrimesOnly, build_E, measure_E
from khinlab.circleset import CircleIntervalSet


def _arc_overlap(c1, r1, c2, r2):
    """Length of (c1 - r1, c1 + r1) intersected with (c2 - r2, c2 + r2) on the circle."""
    best = F(0)
    for shift in (-1, 0, 1):
        lo = max(c1 - r1, c2 + shift - r2)
        hi = min(c1 + r1, c2 + shift + r2)
        best += max(F(0), hi - lo)
    return best


def brute_pair(m, n, psi, policy):
    """(b1, b2) by summing every pair of arcs; coinciding centres go to b2."""
    rm, rn = psi(m) / m, psi(n) / n
    b1 = b2 = F(0)
    if not rm or not rn:
        return b1, b2
    for a in range(1, m + 1):
        if math.gcd(a, m) > policy.cut(m):
            continue
        for b in range(1, n + 1):
            if math.gcd(b, n) > policy.cut(n):
                continue
            x = _arc_overlap(F(a, m), rm, F(b, n), rn)
            if a * n == b * m:
                b2 += x
            else:
                b1 += x
    return b1, b2


def test_hand_fixtures():
    r = ov.intersect_pair(2, 3, Const(F(1, 10)), Full())
    assert (r.total, r.b1, r.b2, r.coinciding_centers) == (F(1, 15), 0, F(1, 15), 1)
    r = ov.intersect_pair(2, 5, Const(F(1, 4)), Full())
    assert (r.total, r.b1, r.b2) == (F(1, 4), F(3, 20), F(1, 10))
    assert ov.pair_overlap(2, 5, Const(F(1, 4)), Full()) == (F(3, 20), F(1, 10))
    r = ov.intersect_pair(4, 9, Const(F(0)), Coprime())
    assert r.total == r.b1 == r.b2 == 0 and not r.violations


def test_report_serialisation():
    r = ov.intersect_pair(2, 3, Const(F(1, 10)), Full())
    assert ov.OverlapReport.CSV_HEADER.count(",") == r.csv_row().count(",")
    d = r.as_dict()
    assert d["b1"] == "0" and d["total"] == "1/15"


_policies = st.sampled_from([Full(), Coprime(), FixedCut(2), LogPower(F(1, 2)), LogPower(F(2))])
_psis = st.sampled_from([Const(F(1, 2)), Const(F(1, 7)), Const(F(1, 100)), Power(F(1), F(1, 2)), PrimesOnly(F(1, 2))])


_pairs = st.integers(2, 45).flatmap(lambda n: st.tuples(st.integers(1, n - 1), st.just(n)))


@settings(max_examples=120, deadline=None)
@given(_pairs, _psis, _policies)
def test_pair_decomposition_against_brute_force(pair, psi, policy):
    m, n = pair
    r = ov.intersect_pair(m, n, psi, policy)
    assert (r.b1, r.b2) == brute_pair(m, n, psi, policy)
    assert r.total == (build_E(m, psi, policy) & build_E(n, psi, policy)).measure()
    assert ov.pair_overlap(m, n, psi, policy) == (r.b1, r.b2)
    assert not r.violations


def test_pair_routes_agree_on_larger_pairs():
    rng = random.Random(11)
    policies = [Full(), Coprime(), FixedCut(3), LogPower(F(1, 4)), LogPower(F(1))]
    psis = [Const(F(1, 2)), Const(F(1, 9)), Power(F(1), F(1, 3))]
    for _ in range(300):
        n = rng.randrange(2, 1500)
        m = rng.randrange(1, n)
        psi, pol = rng.choice(psis), rng.choice(policies)
        r = ov.intersect_pair(m, n, psi, pol)
        assert ov.pair_overlap(m, n, psi, pol) == (r.b1, r.b2), (m, n, psi, pol)
        assert r.b2 == r.b2_closed_form
        assert r.b1 <= r.b1_bound
        if ov.b2_forced_zero(m, n, pol):
            assert r.b2 == 0


def _brute_S2(N, psi, policy):
    sets = [build_E(n, psi, policy) for n in range(1, N + 1)]
    return sum(((a & b).measure() for a in sets for b in sets), F(0))


@pytest.mark.parametrize("psi,policy", [
    (Const(F(1, 2)), LogPower(F(1, 4))),
    (Const(F(1, 10)), Coprime()),
    (Power(F(1), F(1, 2)), FixedCut(2)),
])
def test_overlap_sums_against_pairwise_sets(psi, policy):
    N = 30
    s = ov.overlap_sums(N, psi, policy)
    assert s.S2 == _brute_S2(N, psi, policy)
    assert s.S1 == sum((measure_E(n, psi, policy) for n in range(1, N + 1)), F(0))
    assert s.S2 == s.S1 + s.offdiag_b1 + s.offdiag_b2
    assert s.b1_exact


def test_vectorized_and_pairwise_paths_agree(monkeypatch):
    psi, pol = Const(F(1, 2)), LogPower(F(1, 4))
    fast = ov.overlap_sums(150, psi, pol)
    monkeypatch.setattr(ov, "_fits_int64", lambda active, policy: False)
    slow = ov.overlap_sums(150, psi, pol)
    assert fast == slow


def test_pair_cap_switches_to_bound():
    psi, pol = Const(F(1, 2)), LogPower(F(1, 4))
    exact = ov.overlap_sums(60, psi, pol)
    capped = ov.overlap_sums(60, psi, pol, pair_cap=10)
    assert not capped.b1_exact
    assert capped.offdiag_b2 == exact.offdiag_b2
    assert capped.S2 >= exact.S2


def test_quasi_independence_small_cases():
    q = ov.quasi_independence(1, Const(F(1, 2)), Full(), F(1, 2))
    assert q.sums.S2 == q.sums.S1 == 1
    q = ov.quasi_independence(2, Const(F(0)), Full(), F(1, 2))
    assert q.sums.S1 == q.sums.S2 == 0 and q.holds


def test_quasi_independence_regression():
    q = ov.quasi_independence(200, Const(F(1, 2)), LogPower(F(1, 4)), F(1))
    assert q.holds and q.direct_holds and q.partial_summation_holds
    assert float(q.ratio) == pytest.approx(1.0068618002100762, rel=1e-14)


def test_borel_cantelli_small_cases():
    psi = Const(F(1, 10))
    bc = ov.borel_cantelli_bound(1, psi, Full())
    assert bc.ratio == measure_E(1, psi, Full()) == bc.union
    # coprime centres 0, 1/2, 1/3, 2/3 give pairwise disjoint arcs, so S2 is the
    # diagonal sum of the measures themselves and the ratio collapses to S1
    bc = ov.borel_cantelli_bound(3, Const(F(1, 100)), Coprime())
    lam = [measure_E(n, Const(F(1, 100)), Coprime()) for n in (1, 2, 3)]
    assert bc.S2 == sum(lam)
    assert bc.ratio == sum(lam) ** 2 / sum(lam) == bc.union
    with pytest.raises(ValueError):
        ov.borel_cantelli_bound(5, Const(F(0)), Full())


def test_borel_cantelli_ordering():
    for N, psi, pol in [(500, Const(F(1, 2)), LogPower(F(1, 4))), (300, Const(F(1, 20)), Coprime()),
                        (200, Power(F(1), F(1)), Full())]:
        bc = ov.borel_cantelli_bound(N, psi, pol)
        assert 0 < bc.ratio <= bc.union <= min(F(1), bc.S1)


def test_union_measure_against_folded_union():
    for psi, pol in [(Const(F(1, 100)), Full()), (Const(F(1, 30)), Coprime()), (Power(F(1, 2), F(1)), FixedCut(2))]:
        acc = CircleIntervalSet.empty()
        for N in range(1, 40):
            acc = acc | build_E(N, psi, pol)
            assert ov.union_measure(1, N, psi, pol) == acc.measure()
        assert ov.union_measure(7, 7, psi, pol) == measure_E(7, psi, pol)
    assert ov.union_measure(2, 3, Const(F(1, 100)), Full()) == F(1, 30)


def test_union_measure_monotone():
    psi, pol = Const(F(1, 50)), Coprime()
    vals = [ov.union_measure(5, N, psi, pol) for N in range(5, 120, 7)]
    assert vals == sorted(vals)

