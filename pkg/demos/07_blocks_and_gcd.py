"""
Divergence blocks and the gcd hypothesis
========================================
"""
from fractions import Fraction

from khinlab import Const, Indicator, PrimesOnly
from khinlab.campaigns import block_divergence, theorem3_check

# blocks 2^(2^k) < n <= 2^(2^(k+1))
tab = block_divergence(Const(Fraction(1, 2)), Fraction(1), 3)
for row in tab.rows():
    print(row)
print("partition consistent:", tab.partition_consistent())

# pairs with a large common factor relative to n
print(theorem3_check(PrimesOnly(Fraction(1, 2)), Fraction(1, 2), 10000).violations)
print(theorem3_check(Indicator(frozenset({10, 20}), Fraction(1, 2)), Fraction(1), 100).violations)
