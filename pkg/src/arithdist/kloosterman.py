"""Kloosterman sums S(a, b; c) and the normalised Kl_2 = S / sqrt(p).

Sums are evaluated directly over the units mod c. Inverses come in one
vectorised batch from Euler's theorem, ``x^-1 = x^(phi(c) - 1) mod c``, and
the sum is accumulated as cosines, so the value is real by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_MODULUS = 10_000_000
MR_LIMIT = 341_550_071_728_321
_MR_BASES = (2, 3, 5, 7, 11, 13, 17)


class DomainError(ValueError):
    """Modulus or primality precondition violated."""


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.4e14.

    Raises
    ------
    DomainError
        If ``n`` is at or beyond the deterministic range.
    """
    n = int(n)
    if n >= MR_LIMIT:
        raise DomainError(f"primality test is deterministic only below {MR_LIMIT}")
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def euler_phi(c: int) -> int:
    result, m, p = c, c, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def _powmod(base: np.ndarray, exp: int, mod: int) -> np.ndarray:
    # operands stay below mod^2 < 2^63 for mod <= 1e7 (well within 3e9)
    result = np.ones_like(base)
    b = base % mod
    while exp:
        if exp & 1:
            result = result * b % mod
        b = b * b % mod
        exp >>= 1
    return result


def unit_inverses(c: int):
    """Units x mod c and their inverses, as int64 arrays."""
    x = np.arange(1, c + 1, dtype=np.int64) % c
    if c == 1:
        return np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64)
    x = x[np.gcd(x, c) == 1]
    return x, _powmod(x, euler_phi(c) - 1, c)


@dataclass(frozen=True)
class KloostermanValue:
    a: int
    b: int
    c: int
    value: float


def kloosterman_sum(a: int, b: int, c: int) -> float:
    """S(a, b; c) = sum over units x of e((a x + b x^-1) / c)."""
    c = int(c)
    if c < 1 or c > MAX_MODULUS:
        raise DomainError(f"modulus must lie in [1, {MAX_MODULUS}], got {c}")
    x, xinv = unit_inverses(c)
    phase = ((int(a) % c) * x + (int(b) % c) * xinv) % c
    return float(np.cos((2.0 * math.pi / c) * phase).sum())


def _check_prime(p: int) -> int:
    p = int(p)
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    return p


def kl2(a: int, b: int, p: int) -> float:
    """Kl_2(a, b; p) = S(a, b; p) / sqrt(p) for prime p."""
    p = _check_prime(p)
    return kloosterman_sum(a, b, p) / math.sqrt(p)


def kl2_table(p: int, chunk: int = 256) -> np.ndarray:
    """Kl_2(1, b; p) for b = 0..p-1 (direct summation for each b).

    Since ``S(a, b; p) = S(1, ab; p)`` for p not dividing a, this row gives
    every Kl_2(a, b; p) with ``a`` a unit.
    """
    p = _check_prime(p)
    x, xinv = unit_inverses(p)
    out = np.empty(p)
    scale = 2.0 * math.pi / p
    for lo in range(0, p, chunk):
        b = np.arange(lo, min(p, lo + chunk), dtype=np.int64)
        phase = (x[None, :] + b[:, None] * xinv[None, :]) % p
        out[lo:lo + b.size] = np.cos(scale * phase).sum(axis=1)
    return out / math.sqrt(p)


def orthogonality_average(p: int, m: int, n: int) -> float:
    """(1/(p-1)) sum over 1 <= a < p of Kl_2(a, m; p) Kl_2(a, n; p)."""
    p = _check_prime(p)
    a = np.arange(1, p, dtype=np.int64)
    t = kl2_table(p)
    prod = t[(a * (m % p)) % p] * t[(a * (n % p)) % p]
    return math.fsum(prod.tolist()) / (p - 1)


def orthogonality_matrix(p: int) -> np.ndarray:
    """All averages G[m, n] for residues m, n in 0..p-1."""
    p = _check_prime(p)
    t = kl2_table(p)
    a = np.arange(1, p, dtype=np.int64)
    r = np.arange(p, dtype=np.int64)
    k = t[(a[:, None] * r[None, :]) % p]
    # elementwise products summed over a keep the reduction order fixed
    return np.einsum("am,an->mn", k, k, optimize=False) / (p - 1)


def orthogonality_closed_form(p: int, m: int, n: int) -> float:
    """Exact value for p not dividing mn: 1 - 1/(p(p-1)) or -(p+1)/(p(p-1))."""
    if (m - n) % p == 0:
        return 1.0 - 1.0 / (p * (p - 1))
    return -(p + 1) / (p * (p - 1))
