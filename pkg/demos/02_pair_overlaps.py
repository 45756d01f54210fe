"""
Pairwise overlaps and the coinciding-centre split
=================================================

lambda(E_m cap E_n) splits into b1, from arcs whose centres differ, and b2,
from centres a/m = b/n that coincide. b2 vanishes once gcd(m, n) is small
against n / D.
"""
from fractions import Fraction

from khinlab import Const, Full, LogPower, intersect_pair
from khinlab.overlap import OverlapReport

print(OverlapReport.CSV_HEADER)
for m, n, c in [(2, 3, Fraction(1, 10)), (2, 5, Fraction(1, 4)), (12, 18, Fraction(1, 2))]:
    print(intersect_pair(m, n, Const(c), Full()).csv_row())

# with a logarithmic cutoff most pairs lose their coinciding part
pol = LogPower(Fraction(1, 2))
psi = Const(Fraction(1, 2))
zero = sum(intersect_pair(m, 240, psi, pol).b2 == 0 for m in range(1, 240))
print(f"n=240, D={pol.cut(240)}: b2 = 0 for {zero} of 239 partners")
