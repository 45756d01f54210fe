"""
Approximation sets on the circle
================================

E_n^D collects the arcs of radius psi(n)/n around the fractions a/n whose
numerator shares at most D with n. D = n gives the full sets, D = 1 the
coprime ones.
"""
from fractions import Fraction

from khinlab import Const, Coprime, FixedCut, Full, LogPower, build_E, measure_E

psi = Const(Fraction(1, 10))

# n = 6 with each policy; the measure is 2 psi(n) |S| / n
for policy in (Full(), FixedCut(2), Coprime()):
    s = build_E(6, psi, policy)
    print(f"{str(policy):>8}  measure {s.measure()}  pieces {len(s)}")

# the set itself, as exact arcs
print(build_E(6, psi, FixedCut(2)).dump())

# the logarithmic cutoff grows very slowly
pol = LogPower(Fraction(1, 2))
for n in (10, 100, 10**4, 10**6, 10**9):
    print(f"n={n:>10}  D={pol.cut(n)}  measure/psi={measure_E(n, psi, pol) / psi(n)}")
