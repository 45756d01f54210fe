"""
How many numerators survive the cutoff
======================================

|S| >= phi(n) always, and the scan confirms |S| >= n eps / 10 with room to
spare across a range. The tightest spots are at primorials.
"""
from fractions import Fraction

from khinlab.campaigns import CampaignConfig, lemma_corollary_scan

scan = lemma_corollary_scan(CampaignConfig(Fraction(1, 2), n_min=1000, n_max=40000))
print(scan.summary())
tight = sorted(scan.records, key=lambda r: Fraction(r.cardinality, r.n))[:5]
for r in tight:
    print(r.n, r.dcut, f"{r.cardinality / r.n:.4f}")
