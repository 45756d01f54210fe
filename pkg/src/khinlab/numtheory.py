"""Sieve-backed arithmetic functions and exact products over primes."""
from __future__ import annotations

import math
import numbers
from fractions import Fraction
from functools import lru_cache

import gmpy2
import numpy as np

DEFAULT_PRIME_LIMIT = 10**7


class _Coprime:
    # Fraction() copies numerator/denominator of any registered Rational
    # without re-running gcd; only use for pairs already in lowest terms.
    __slots__ = ("numerator", "denominator")

    def __init__(self, num: int, den: int):
        self.numerator = num
        self.denominator = den


numbers.Rational.register(_Coprime)


def exact(q: gmpy2.mpq) -> Fraction:
    """Convert a reduced gmpy2 rational to a Fraction without a second gcd."""
    return Fraction(_Coprime(int(q.numerator), int(q.denominator)))


class PrimeTable:
    """Smallest-prime-factor table for 2 <= k <= limit.

    Immutable after construction. Queries above ``limit`` fall back to
    trial division.
    """

    def __init__(self, limit: int = DEFAULT_PRIME_LIMIT):
        if limit < 2:
            limit = 2
        self.limit = limit
        spf = np.zeros(limit + 1, dtype=np.int32 if limit < 2**31 else np.int64)
        for p in range(2, math.isqrt(limit) + 1):
            if spf[p] == 0:
                block = spf[p * p :: p]
                block[block == 0] = p
        idx = np.flatnonzero(spf == 0)
        spf[idx] = idx
        spf[:2] = 0
        spf.flags.writeable = False
        self.spf = spf
        self._primes = None

    @property
    def primes(self) -> np.ndarray:
        if self._primes is None:
            ks = np.arange(self.limit + 1)
            p = np.flatnonzero((self.spf == ks) & (ks >= 2))
            p.flags.writeable = False
            self._primes = p
        return self._primes

    def primes_upto(self, cut: int) -> list[int]:
        if cut > self.limit:
            raise ValueError(f"cut {cut} exceeds prime table limit {self.limit}")
        ps = self.primes
        return ps[: np.searchsorted(ps, cut, side="right")].tolist()

    def factorize(self, n: int) -> list[tuple[int, int]]:
        """Prime factorization as ascending (p, e) pairs; ``factorize(1) == []``."""
        if n < 1:
            raise ValueError("factorize needs n >= 1")
        if n > self.limit:
            return _trial_factorize(n)
        out: list[tuple[int, int]] = []
        spf = self.spf
        while n > 1:
            p = int(spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        return out

    def is_prime(self, n: int) -> bool:
        if n < 2:
            return False
        if n > self.limit:
            f = _trial_factorize(n)
            return f == [(n, 1)]
        return int(self.spf[n]) == n


def _trial_factorize(n: int) -> list[tuple[int, int]]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


_table: PrimeTable | None = None
_table_limit = DEFAULT_PRIME_LIMIT


def set_prime_limit(limit: int) -> None:
    """Change the limit of the shared table; it is rebuilt lazily on next use."""
    global _table, _table_limit
    _table_limit = limit
    if _table is not None and _table.limit != limit:
        _table = None


def prime_table(min_limit: int = 0) -> PrimeTable:
    """The process-wide table, grown if ``min_limit`` exceeds it."""
    global _table
    if _table is None or _table.limit < min_limit:
        _table = PrimeTable(max(_table_limit, min_limit))
    return _table


def factorize(n: int) -> list[tuple[int, int]]:
    if n < 1:
        raise ValueError("factorize needs n >= 1")
    if n <= _table_limit:
        return prime_table().factorize(n)
    return _trial_factorize(n)


def euler_phi(n: int) -> int:
    if n < 1:
        raise ValueError("euler_phi is defined for n >= 1")
    result = n
    for p, _ in factorize(n):
        result = result // p * (p - 1)
    return result


def moebius(n: int) -> int:
    if n < 1:
        raise ValueError("moebius is defined for n >= 1")
    f = factorize(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def smallest_prime_factor(n: int) -> int:
    if n < 2:
        raise ValueError("n must be >= 2")
    return factorize(n)[0][0]


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def divisors_up_to(n: int, cut: int) -> list[int]:
    """Divisors d of n with d <= cut, ascending."""
    if n < 1:
        raise ValueError("divisors_up_to needs n >= 1")
    if cut <= 0:
        return []
    if cut >= n:
        return divisors(n)
    divs = [1]
    for p, e in factorize(n):
        nxt = []
        for d in divs:
            for _ in range(e + 1):
                if d > cut:
                    break
                nxt.append(d)
                d *= p
        divs = nxt
    return sorted(divs)


def primorial(k: int) -> int:
    """Product of the first k primes; primorial(0) == 1."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return 1
    out, p, found = 1, 1, 0
    while found < k:
        p += 1
        if _trial_factorize(p) == [(p, 1)]:
            out *= p
            found += 1
    return out


def first_primes(k: int) -> list[int]:
    out, p = [], 1
    while len(out) < k:
        p += 1
        if _trial_factorize(p) == [(p, 1)]:
            out.append(p)
    return out


def tree_prod(xs) -> gmpy2.mpz:
    xs = [gmpy2.mpz(x) for x in xs]
    if not xs:
        return gmpy2.mpz(1)
    while len(xs) > 1:
        xs = [xs[i] * xs[i + 1] if i + 1 < len(xs) else xs[i] for i in range(0, len(xs), 2)]
    return xs[0]


def tree_sum(qs) -> gmpy2.mpq:
    qs = list(qs)
    if not qs:
        return gmpy2.mpq(0)
    while len(qs) > 1:
        qs = [qs[i] + qs[i + 1] if i + 1 < len(qs) else qs[i] for i in range(0, len(qs), 2)]
    return qs[0]


@lru_cache(maxsize=64)
def mertens_product(cut: int) -> Fraction:
    """Exact product of (1 - 1/p) over primes p <= cut."""
    if cut < 0:
        raise ValueError("cut must be >= 0")
    ps = prime_table(cut).primes_upto(cut)
    return exact(gmpy2.mpq(tree_prod(p - 1 for p in ps), tree_prod(ps)))


@lru_cache(maxsize=64)
def zeta_ratio_partial(cut: int) -> Fraction:
    """Exact product of 1 + 1/(p(p-1)) over primes p <= cut.

    Converges to zeta(2)zeta(3)/zeta(6) from below.
    """
    if cut < 0:
        raise ValueError("cut must be >= 0")
    ps = prime_table(cut).primes_upto(cut)
    return exact(
        gmpy2.mpq(tree_prod(p * p - p + 1 for p in ps), tree_prod(p * (p - 1) for p in ps))
    )


@lru_cache(maxsize=64)
def squarefree_phi_sum(cut: int) -> Fraction:
    """Exact sum of mu(l)^2 / phi(l) over 1 <= l <= cut."""
    if cut < 1:
        raise ValueError("squarefree_phi_sum needs cut >= 1")
    table = prime_table(cut)
    ks = np.arange(cut + 1, dtype=np.int64)
    phi = ks.copy()
    sqfree = np.ones(cut + 1, dtype=bool)
    for p in table.primes_upto(cut):
        phi[p::p] = phi[p::p] // p * (p - 1)
        sqfree[p * p :: p * p] = False
    ls = np.flatnonzero(sqfree[1:]) + 1
    return exact(tree_sum(gmpy2.mpq(1, int(v)) for v in phi[ls]))
