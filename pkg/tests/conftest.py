import math
from fractions import Fraction

import pytest


def brute_phi(n):
    return sum(1 for a in range(1, n + 1) if math.gcd(a, n) == 1)


def brute_card(n, cut):
    return sum(1 for a in range(1, n + 1) if math.gcd(a, n) <= cut)


def brute_primes(limit):
    return [p for p in range(2, limit + 1) if all(p % q for q in range(2, math.isqrt(p) + 1))]


def grid_measure(intervals, den):
    """Lebesgue measure of a union of raw intervals whose endpoints lie on the 1/den grid."""
    covered = set()
    for lo, hi in intervals:
        a, b = int(lo * den), int(hi * den)
        for k in range(a, b):
            covered.add(k % den)
    return Fraction(len(covered), den)


@pytest.fixture
def F():
    return Fraction


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when != "call":
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                lines.append((props["criterion"], key, props.get("detail", "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for num, outcome, detail in sorted(lines):
            terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if outcome == 'passed' else 'FAIL'}  {detail}")
