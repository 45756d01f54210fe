import math
import random
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from khinlab import approxsets as ax
from khinlab import numtheory as nt
from khinlab.approxsets import (
    Const,
    Coprime,
    FixedCut,
    Full,
    Indicator,
    LogPow,
    LogPower,
    Power,
    PrimesOnly,
    Table,
    build_E,
    measure_E,
    parse_policy,
    parse_psi,
    psi_diagnostics,
    support,
    support_cardinality,
)

from conftest import brute_card, grid_measure


def test_psi_families():
    assert Const(F(1, 10))(7) == F(1, 10)
    assert Const(F(3))(5) == F(1, 2)
    assert PrimesOnly(F(1, 2))(6) == 0
    assert PrimesOnly(F(1, 2))(7) == F(1, 2)
    assert Power(F(1), F(2))(3) == F(1, 9)
    assert Indicator(frozenset({10, 20}), F(1, 3))(20) == F(1, 3)
    assert Indicator(frozenset({10, 20}), F(1, 3))(21) == 0


def test_unclamped_psi_raises():
    with pytest.raises(ValueError):
        Const(F(3), clamp=False)(4)
    with pytest.raises(ValueError):
        Const(F(1, 4))(0)


def test_logpow_edge_cases():
    assert LogPow(F(1, 3), F(1))(1) == 0
    assert LogPow(F(1, 3), F(0))(1) == F(1, 3)
    assert LogPow(F(1), F(-1))(1) == F(1, 2)
    v = LogPow(F(1, 4), F(-1))(100)
    assert abs(float(v) - 0.25 / math.log(100)) < 1e-15


def test_parse_round_trip(tmp_path):
    path = tmp_path / "psi.csv"
    path.write_text("n,psi\n3,1/7\n5,1/9\n")
    texts = [
        "const:1/10",
        "logpow:c=1/2,beta=-1",
        "power:c=1,alpha=3/2",
        "primes:1/2",
        "indicator:1/2:10,20",
        f"table:@{path}",
    ]
    for text in texts:
        spec = parse_psi(text)
        assert parse_psi(str(spec)) == spec
    tab = parse_psi(f"table:@{path}")
    assert tab(5) == F(1, 9) and tab(4) == 0
    for text in ("full", "coprime", "cut:2", "logpower:1/2"):
        assert str(parse_policy(text)) == text


@pytest.mark.parametrize("bad", ["const:0.1", "const:", "nope:1", "logpow:c=1", "table:path.csv"])
def test_parse_psi_rejects(bad):
    with pytest.raises(ValueError):
        parse_psi(bad)


@pytest.mark.parametrize("bad", ["cut:2.5", "logpower:0.5", "logpower:0", "half"])
def test_parse_policy_rejects(bad):
    with pytest.raises(ValueError):
        parse_policy(bad)


def test_policy_cuts():
    assert LogPower(F(1, 2)).cut(10000) == 3
    assert LogPower(F(1, 2)).cut(100) == 2
    assert Coprime().cut(360) == 1
    assert Full().cut(360) == 360
    assert FixedCut(5).cut(360) == 5


def test_log_power_cut_against_float_oracle():
    rng = random.Random(7)
    for eps in (F(1, 8), F(1, 4), F(1, 2), F(3, 4), F(2)):
        pol = LogPower(eps)
        for n in [rng.randrange(3, 10**9) for _ in range(300)] + list(range(3, 200)):
            x = math.log(n) ** float(eps)
            if abs(x - round(x)) > 1e-9:
                assert pol.cut(n) == max(1, math.floor(x)), (eps, n)


def test_near_integer_floor_is_recorded():
    before = len(ax.tie_events)
    with mpmath.workprec(128):
        assert ax.floor_audited(mpmath.mpf(3) - mpmath.mpf(2) ** -125, "test", 11) == 3
        assert ax.floor_audited(mpmath.mpf("2.5"), "test", 12) == 2
    assert len(ax.tie_events) == before + 1


def test_support_examples():
    s = support(6, 2)
    assert s.members().tolist() == [1, 2, 4, 5] and s.cardinality == 4
    assert support_cardinality(12, 3) == 8 == nt.euler_phi(12) + nt.euler_phi(6) + nt.euler_phi(4)
    for n in range(1, 200):
        assert support_cardinality(n, 1) == nt.euler_phi(n)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 3000), st.integers(1, 3000))
def test_support_cardinality_matches_enumeration(n, cut):
    assert support_cardinality(n, cut) == brute_card(n, cut) == len(support(n, cut).members())


def test_set_examples():
    e = build_E(3, Const(F(1, 10)), Full())
    assert e.measure() == F(1, 5)
    assert e.intervals == [(0, F(1, 30)), (F(3, 10), F(11, 30)), (F(19, 30), F(7, 10)), (F(29, 30), 1)]
    assert not build_E(9, Const(F(0)), Full())
    assert build_E(6, Const(F(1, 10)), FixedCut(2)).measure() == F(2, 15)
    assert measure_E(6, Const(F(1, 10)), FixedCut(2)) == F(2, 15)


_policies = st.sampled_from([Full(), Coprime(), FixedCut(2), FixedCut(6), LogPower(F(1, 2)), LogPower(F(1, 4))])
_psis = st.sampled_from([Const(F(1, 10)), Const(F(1, 2)), Const(F(1, 1000)), Power(F(1), F(1)), PrimesOnly(F(1, 3))])


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 400), _psis, _policies)
def test_measure_matches_materialized_set(n, psi, policy):
    e = build_E(n, psi, policy)
    assert e.measure() == measure_E(n, psi, policy)
    p = psi(n)
    raw = [(F(a, n) - p / n, F(a, n) + p / n) for a in range(1, n + 1) if math.gcd(a, n) <= policy.cut(n)]
    if p:
        den = n * p.denominator
        assert e.measure() == grid_measure(raw, den)


def test_measure_bounds_by_policy():
    psi = Const(F(1, 7))
    for n in range(1, 300):
        assert measure_E(n, psi, Coprime()) == 2 * psi(n) * nt.euler_phi(n) / n
        assert measure_E(n, psi, Full()) == 2 * psi(n)


def test_psi_diagnostics():
    d = psi_diagnostics(Const(F(0)), 50, F(1, 2))
    assert d.sum_psi == 0 and d.sum_phi_weighted == 0 and d.sum_log_weighted == 0
    d = psi_diagnostics(Const(F(1, 2)), 4, F(1, 2))
    assert d.sum_psi == F(3, 2)
    d = psi_diagnostics(Const(F(1, 2)), 10, F(1, 2))
    assert d.sum_phi_weighted == sum(F(nt.euler_phi(n), 2 * n) for n in range(2, 11))
    ref = sum(0.5 / math.log(n) ** 0.5 for n in range(2, 11))
    assert abs(float(d.sum_log_weighted) - ref) < 1e-12
    with pytest.raises(ValueError):
        psi_diagnostics(Const(F(1, 2)), 1, F(1, 2))
