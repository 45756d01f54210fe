"""Approximation functions, gcd-reduction policies and the sets E_n^D built from them.

``E_n^D`` is the union over ``a in S`` of ``((a - psi(n))/n, (a + psi(n))/n)``
with ``S = {1 <= a <= n : gcd(a, n) <= D(n)}``. The full sets (``D = n``) and
the coprime sets (``D = 1``) are the two ends of the family.
"""
from __future__ import annotations

import csv
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import gmpy2
import mpmath
import numpy as np

from . import numtheory as nt
from .circleset import CircleIntervalSet, normalize_scaled
from .realarith import fmt_rational, mpf, precision, working_precision

log = logging.getLogger(__name__)

HALF = Fraction(1, 2)
DYADIC_BITS = 64

# near-tie events from floor computations: (context, n, value)
tie_events: list[tuple[str, int, str]] = []


def parse_rational(text: str) -> Fraction:
    """Parse ``p/q`` or an integer string; decimals are rejected."""
    text = text.strip()
    if not text or any(c in text for c in ".eE"):
        raise ValueError(f"not an exact rational: {text!r}")
    num, _, den = text.partition("/")
    try:
        return Fraction(int(num), int(den)) if den else Fraction(int(num))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not an exact rational: {text!r}") from exc


def _dyadic(x: mpmath.mpf) -> Fraction:
    return Fraction(int(mpmath.nint(mpmath.ldexp(x, DYADIC_BITS))), 2**DYADIC_BITS)


# --------------------------------------------------------------------------
# psi families


class PsiSpec(ABC):
    """A named approximation function with exact values in [0, 1/2]."""

    clamp: bool

    @abstractmethod
    def raw(self, n: int) -> Fraction:
        ...

    def __call__(self, n: int) -> Fraction:
        if n < 1:
            raise ValueError("psi is defined for n >= 1")
        v = self.raw(n)
        if 0 <= v <= HALF:
            return v
        if not self.clamp:
            raise ValueError(f"psi({n}) = {v} outside [0, 1/2]")
        return min(max(v, Fraction(0)), HALF)

    def support_hint(self, N: int) -> list[int] | None:
        """Indices n <= N where psi may be nonzero, if known cheaply."""
        return None


@dataclass(frozen=True)
class Const(PsiSpec):
    c: Fraction
    clamp: bool = True

    def raw(self, n):
        return self.c

    def __str__(self):
        return f"const:{fmt_q(self.c)}"


@dataclass(frozen=True)
class LogPow(PsiSpec):
    """psi(n) = c * (ln n)^beta, snapped to a 64-bit dyadic rational."""

    c: Fraction
    beta: Fraction
    clamp: bool = True

    def raw(self, n):
        if self.c == 0:
            return Fraction(0)
        if n == 1:
            if self.beta > 0:
                return Fraction(0)
            if self.beta == 0:
                return self.c
            return HALF if self.c > 0 else Fraction(0)
        if self.beta == 0:
            return self.c
        with working_precision():
            return _dyadic(mpf(self.c) * mpmath.log(n) ** mpf(self.beta))

    def __str__(self):
        return f"logpow:c={fmt_q(self.c)},beta={fmt_q(self.beta)}"


@dataclass(frozen=True)
class Power(PsiSpec):
    """psi(n) = c * n^(-alpha); exact for integral alpha, dyadic otherwise."""

    c: Fraction
    alpha: Fraction
    clamp: bool = True

    def raw(self, n):
        if self.alpha.denominator == 1:
            return self.c / Fraction(n) ** int(self.alpha)
        with working_precision():
            return _dyadic(mpf(self.c) * mpmath.power(n, -mpf(self.alpha)))

    def __str__(self):
        return f"power:c={fmt_q(self.c)},alpha={fmt_q(self.alpha)}"


@dataclass(frozen=True)
class PrimesOnly(PsiSpec):
    c: Fraction
    clamp: bool = True

    def raw(self, n):
        return self.c if nt.prime_table().is_prime(n) else Fraction(0)

    def support_hint(self, N):
        return nt.prime_table(N).primes_upto(N)

    def __str__(self):
        return f"primes:{fmt_q(self.c)}"


@dataclass(frozen=True)
class Indicator(PsiSpec):
    """psi = c on an explicit finite support, 0 elsewhere."""

    support: frozenset
    c: Fraction
    clamp: bool = True

    def raw(self, n):
        return self.c if n in self.support else Fraction(0)

    def support_hint(self, N):
        return sorted(k for k in self.support if k <= N)

    def __str__(self):
        return f"indicator:{fmt_q(self.c)}:" + ",".join(map(str, sorted(self.support)))


@dataclass(frozen=True)
class Table(PsiSpec):
    """Explicit n -> value map; 0 outside its domain."""

    values: tuple[tuple[int, Fraction], ...]
    source: str = ""
    clamp: bool = True
    _lookup: dict = field(default=None, init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_lookup", dict(self.values))

    def raw(self, n):
        return self._lookup.get(n, Fraction(0))

    def support_hint(self, N):
        return sorted(k for k, v in self.values if k <= N and v != 0)

    def __str__(self):
        return f"table:@{self.source}"

    @classmethod
    def from_csv(cls, path: str | Path) -> "Table":
        rows = []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                rows.append((int(row["n"]), parse_rational(row["psi"])))
        return cls(tuple(sorted(rows)), source=str(path))


fmt_q = fmt_rational


def _kv(body: str, keys: tuple[str, ...]) -> dict[str, Fraction]:
    out = {}
    for part in body.split(","):
        k, sep, v = part.partition("=")
        if not sep or k.strip() not in keys:
            raise ValueError(f"expected {','.join(k + '=...' for k in keys)}, got {body!r}")
        out[k.strip()] = parse_rational(v)
    if set(out) != set(keys):
        raise ValueError(f"missing keys in {body!r}")
    return out


def parse_psi(text: str) -> PsiSpec:
    """Parse ``const:1/10``, ``logpow:c=1,beta=-1``, ``power:c=1,alpha=1``,
    ``primes:1/2``, ``indicator:1/2:10,20`` or ``table:@file.csv``."""
    family, sep, body = text.partition(":")
    if not sep:
        raise ValueError(f"malformed psi spec {text!r}")
    if family == "const":
        return Const(parse_rational(body))
    if family == "logpow":
        kv = _kv(body, ("c", "beta"))
        return LogPow(kv["c"], kv["beta"])
    if family == "power":
        kv = _kv(body, ("c", "alpha"))
        return Power(kv["c"], kv["alpha"])
    if family == "primes":
        return PrimesOnly(parse_rational(body))
    if family == "indicator":
        c, sep, members = body.partition(":")
        if not sep:
            raise ValueError(f"malformed indicator spec {text!r}")
        return Indicator(frozenset(int(k) for k in members.split(",") if k), parse_rational(c))
    if family == "table":
        if not body.startswith("@"):
            raise ValueError("table spec must be table:@path")
        return Table.from_csv(body[1:])
    raise ValueError(f"unknown psi family {family!r}")


def eval_psi(spec: PsiSpec, n: int) -> Fraction:
    return spec(n)


# --------------------------------------------------------------------------
# reduction policies


class ReductionPolicy(ABC):
    @abstractmethod
    def cut(self, n: int) -> int:
        """Integer gcd cutoff, always >= 1."""


@dataclass(frozen=True)
class Full(ReductionPolicy):
    def cut(self, n):
        return n

    def __str__(self):
        return "full"


@dataclass(frozen=True)
class Coprime(ReductionPolicy):
    def cut(self, n):
        return 1

    def __str__(self):
        return "coprime"


@dataclass(frozen=True)
class FixedCut(ReductionPolicy):
    d: int

    def cut(self, n):
        return max(self.d, 1)

    def __str__(self):
        return f"cut:{self.d}"


@dataclass(frozen=True)
class LogPower(ReductionPolicy):
    """D(n) = (ln n)^eps, used through its integer floor."""

    eps: Fraction

    def cut(self, n):
        return _log_power_cut(self.eps, n, precision())

    def __str__(self):
        return f"logpower:{fmt_q(self.eps)}"


def floor_audited(x: mpmath.mpf, context: str, n: int) -> int:
    """floor(x), resolving near-integer values upward with a recorded warning."""
    k = int(mpmath.nint(x))
    tol = mpmath.ldexp(max(abs(x), 1), 8 - mpmath.mp.prec)
    if abs(x - k) <= tol:
        tie_events.append((context, n, mpmath.nstr(x, 30)))
        log.warning("%s: value %s for n=%d within precision of an integer; using %d", context, x, n, k)
        return k
    return int(mpmath.floor(x))


@lru_cache(maxsize=1 << 20)
def _log_power_cut(eps: Fraction, n: int, bits: int) -> int:
    if n <= 2:
        return 1
    with working_precision(bits):
        x = mpmath.log(n) ** mpf(eps)
        if x < 1:
            return 1
        return max(1, floor_audited(x, f"(ln n)^{eps}", n))


def dcut(policy: ReductionPolicy, n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return policy.cut(n)


def parse_policy(text: str) -> ReductionPolicy:
    """Parse ``full``, ``coprime``, ``cut:<d>`` or ``logpower:<eps>``."""
    if text == "full":
        return Full()
    if text == "coprime":
        return Coprime()
    kind, sep, body = text.partition(":")
    if sep and kind == "cut":
        d = int(body)
        if d < 0:
            raise ValueError("cut must be >= 0")
        return FixedCut(d)
    if sep and kind == "logpower":
        eps = parse_rational(body)
        if eps <= 0:
            raise ValueError("logpower exponent must be positive")
        return LogPower(eps)
    raise ValueError(f"unknown reduction policy {text!r}")


# --------------------------------------------------------------------------
# support sets and E_n^D


def support_cardinality(n: int, cut: int) -> int:
    """|{1 <= a <= n : gcd(a, n) <= cut}| via the sum of phi(n/d) over d | n, d <= cut."""
    return sum(nt.euler_phi(n // d) for d in nt.divisors_up_to(n, cut))


def support_members(n: int, cut: int) -> np.ndarray:
    a = np.arange(1, n + 1, dtype=np.int64)
    return a[np.gcd(a, n) <= cut]


@dataclass(frozen=True)
class SupportSet:
    n: int
    dcut: int
    cardinality: int

    def members(self) -> np.ndarray:
        return support_members(self.n, self.dcut)


def support(n: int, cut: int) -> SupportSet:
    if n < 1 or cut < 1:
        raise ValueError("support needs n >= 1 and cut >= 1")
    return SupportSet(n, cut, support_cardinality(n, cut))


def centers(n: int, policy: ReductionPolicy) -> np.ndarray:
    """Numerators a of the interval centres a/n of E_n^D, ascending in 1..n."""
    return support_members(n, policy.cut(n))


def build_E(n: int, psi: PsiSpec, policy: ReductionPolicy) -> CircleIntervalSet:
    p = psi(n)
    if p == 0:
        return CircleIntervalSet.empty()
    num, q = p.numerator, p.denominator
    return normalize_scaled(n * q, ((a * q - num, a * q + num) for a in centers(n, policy).tolist()))


def measure_E(n: int, psi: PsiSpec, policy: ReductionPolicy) -> Fraction:
    """lambda(E_n^D) = 2 psi(n) |S| / n without materialising the set."""
    p = psi(n)
    if p == 0:
        return Fraction(0)
    return 2 * p * support_cardinality(n, policy.cut(n)) / n


# --------------------------------------------------------------------------
# divergence diagnostics


@dataclass(frozen=True)
class PsiDiagnostics:
    N: int
    eps: Fraction
    sum_psi: Fraction
    sum_phi_weighted: Fraction
    sum_log_weighted: mpmath.mpf
    precision_bits: int


def psi_diagnostics(psi: PsiSpec, N: int, eps: Fraction) -> PsiDiagnostics:
    """Partial sums over 2 <= n <= N of psi(n), psi(n)phi(n)/n and psi(n)/(ln n)^eps."""
    if N < 2:
        raise ValueError("N must be >= 2")
    hint = psi.support_hint(N)
    ns = range(2, N + 1) if hint is None else [k for k in hint if k >= 2]
    plain, weighted = [], []
    bits = precision()
    with working_precision(bits):
        e = mpf(eps)
        logsum = mpmath.mpf(0)
        for n in ns:
            v = psi(n)
            if v == 0:
                continue
            q = gmpy2.mpq(v.numerator, v.denominator)
            plain.append(q)
            weighted.append(q * gmpy2.mpq(nt.euler_phi(n), n))
            logsum += mpf(v) / mpmath.log(n) ** e
    return PsiDiagnostics(
        N, eps, nt.exact(nt.tree_sum(plain)), nt.exact(nt.tree_sum(weighted)), logsum, bits
    )
