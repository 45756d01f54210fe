"""
Second moment and the Borel-Cantelli lower bound
================================================

S1 is the sum of measures, S2 the sum of all pairwise overlaps. The ratio
S1^2 / S2 bounds the measure of the union from below; here all three are
exact rationals.
"""
from fractions import Fraction

from khinlab import Const, LogPower, borel_cantelli_bound, quasi_independence, union_measure

psi, eps = Const(Fraction(1, 2)), Fraction(1, 2)
pol = LogPower(eps / 4)

for N in (50, 100, 200):
    q = quasi_independence(N, psi, pol, eps)
    print(f"N={N:4d}  S2/S1^2={float(q.ratio):.6f}  explicit bound holds: {q.holds}")

bc = borel_cantelli_bound(300, Const(Fraction(1, 20)), pol)
print(f"ratio {float(bc.ratio):.6f} <= union {float(bc.union):.6f} <= min(1, S1)")

# the truncated unions only grow
print([float(union_measure(10, N, Const(Fraction(1, 50)), pol)) for N in (20, 40, 80, 160)])
