"""
Primorials need the largest cutoff
==================================

For n = 2*3*5*..., phi(n)/n is as small as it gets, so the least D with
|S| >= eps n is largest there. The ratio to (ln n)^(eps e^gamma) stays in a
bounded window.
"""
from fractions import Fraction

from khinlab.campaigns import primorial_optimality

tab = primorial_optimality(Fraction(1, 2), 16)
print(tab.header)
for row in tab.rows():
    print(row)
