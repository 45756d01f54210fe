"""
Auditing an inequality chain
============================

Each step of the lower bound for |S| is evaluated at every n in a range.
Rational steps are exact; steps with logarithms use 128-bit arithmetic.
Steps that only hold for large n report where they last fail.
"""
from fractions import Fraction

from khinlab.campaigns import audit_scan, proof_step_audit

for st in proof_step_audit(12, Fraction(1, 2), cut=3):
    print(f"{st.name:>20}  {st.fmt(st.lhs)} >= {st.fmt(st.rhs)}  {st.holds}")

audit = audit_scan(Fraction(1, 2), 1000, 5000)
print(audit.header)
for row in audit.rows():
    print(row)
