"""Slow, obviously-correct reference implementations used only by the tests."""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt

import mpmath
import sympy


def trial_is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def trial_factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def kth_residue_by_enumeration(m: int, k: int, p: int) -> bool:
    target = m % p
    return any(pow(y, k, p) == target for y in range(1, p))


def hensel_lifts(z0: int, k: int, m: int, p: int, level: int) -> set[int]:
    """All y in [1, p^level] with y = z0 (mod p) and y^k = m (mod p^level)."""
    q = p**level
    return {y for y in range(1, q + 1) if (y - z0) % p == 0 and (pow(y, k, q) - m) % q == 0}


def crt_by_sweep(pairs: list[tuple[int, int]]) -> int:
    big = 1
    for _, q in pairs:
        big *= q
    for x in range(1, big + 1):
        if all((x - r) % q == 0 for r, q in pairs):
            return x
    raise AssertionError("no solution")


def two_squares_pairs(n: int, positive: bool) -> list[tuple[int, int]]:
    lo = 1 if positive else 0
    out = []
    for x in range(lo, isqrt(n) + 1):
        y2 = n - x * x
        y = isqrt(y2)
        if y * y == y2 and y >= lo and x >= y:
            out.append((x, y))
    return out


def count_triples(N: int, p: int) -> int:
    total = 0
    z = 1
    while 6 * p * z * z < N:
        x = 1
        while x * x + 6 * p * z * z < N:
            y = 1
            while x * x + y * y + 6 * p * z * z <= N:
                if x * x + y * y + 6 * p * z * z == N:
                    total += 1
                y += 1
            x += 1
        z += 1
    return total


def omega_of(base, u: int) -> int:
    out = 1
    for i in range(1, u + 1):
        out *= base.primes[i - 1]
    return out


def recheck_witness(w, k, base, omega: Fraction, t: int) -> list[str]:
    """Independent re-check of conditions (a)-(d) for a desk-policy witness.

    Returns the names of violated conditions (empty when all hold).
    """
    bad = []
    K = 1
    for j in range(1, t):
        K *= k.k(j)
    P = w.prime ** (6 * K * w.h)
    nxt = w.next_stage
    Om = omega_of(base, nxt)
    if w.kind == "top":
        exps = (k.k(t),)
        if not sympy.isprime(w.prime) or gcd(30 * w.target * omega_of(base, t - 1), w.prime) != 1:
            bad.append("a:prime")
    elif w.kind == "pair":
        exps = (k.k(t - 1), k.k(t))
        if w.prime != base.primes[t - 2]:
            bad.append("a:prime")
    else:
        exps = (k.k(w.stage),)
        if w.prime != base.primes[w.stage - 1]:
            bad.append("a:prime")
    rest = w.target - sum(y**e for y, e in zip(w.ys, exps))
    if rest <= 0 or rest % P:
        bad.append("a:divisibility")
    elif rest // P != w.residual:
        bad.append("a:quotient")
    if any(y < P for y in w.ys):
        bad.append("b:lower")
    ref = w.target
    mpmath.mp.dps = 60
    for y, e in zip(w.ys, exps):
        if e * mpmath.log(y) + mpmath.log(4 * t) > mpmath.mpf(omega.numerator) / omega.denominator * mpmath.log(ref) + mpmath.mpf(10) ** -40:
            bad.append("b:upper")
    if gcd(rest, 10 * Om) != 1 or rest % 3 == 2:
        bad.append("c")
    if nxt >= 1:
        q = base.primes[nxt - 1]
        if w.residual % q == 0 or not kth_residue_by_enumeration(w.residual, k.k(nxt), q):
            bad.append("d")
    return bad
