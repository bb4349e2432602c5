"""Exact integer primitives: primality, factorization, modular roots, CRT,
two-squares decomposition and prime search in progressions.

Everything here works on Python ints, so there is no size limit beyond
memory and patience.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd, isqrt, prod
from typing import Iterable, Optional, Sequence

from .errors import ConstructionError, FactorizationBudgetError

__all__ = [
    "Factorization",
    "CongruenceSystem",
    "is_prime",
    "next_prime",
    "factorize",
    "square_split",
    "is_squarefree",
    "mod_pow",
    "kth_power_residue",
    "hensel_lift_power",
    "crt_solve",
    "two_squares",
    "two_squares_all",
    "find_prime_in_ap",
    "iroot",
    "valuation",
    "DEFAULT_RHO_BUDGET",
]

DEFAULT_RHO_BUDGET = 2**32


def _small_primes(limit: int) -> list[int]:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytes(len(range(i * i, limit + 1, i)))
    return [i for i, v in enumerate(sieve) if v]


_TRIAL_LIMIT = 1 << 12
_SMALL_PRIMES = _small_primes(_TRIAL_LIMIT)
_SMALL_PRIME_SET = frozenset(_SMALL_PRIMES)

# Jaeschke / Sorenson-Webster: these bases decide primality below 3.3e24.
_DETERMINISTIC_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_PROBABLE_PRIME_BASES = tuple(_SMALL_PRIMES[:40])


def _strong_probable_prime(n: int, a: int, d: int, s: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int) -> bool:
    """Miller-Rabin; deterministic below 2**64, 40 fixed bases above."""
    if n < 2:
        return False
    if n in _SMALL_PRIME_SET:
        return True
    for p in _SMALL_PRIMES[:60]:
        if n % p == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    bases = _DETERMINISTIC_BASES if n < 1 << 64 else _PROBABLE_PRIME_BASES
    return all(_strong_probable_prime(n, a, d, s) for a in bases)


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than n."""
    c = max(n + 1, 2)
    while not is_prime(c):
        c += 1
    return c


@dataclass(frozen=True)
class Factorization:
    """Prime factorization as increasing (prime, multiplicity) pairs.

    ``cofactor`` is 1 for a complete factorization; otherwise it is the
    unfactored remainder left when a work cap was hit.
    """

    factors: tuple[tuple[int, int], ...] = ()
    cofactor: int = 1

    @property
    def complete(self) -> bool:
        return self.cofactor == 1

    def value(self) -> int:
        return prod(p**e for p, e in self.factors) * self.cofactor

    def as_dict(self) -> dict[int, int]:
        return dict(self.factors)


@dataclass(frozen=True)
class CongruenceSystem:
    """Congruences x = residue (mod modulus) with pairwise coprime moduli."""

    congruences: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        norm = []
        for r, q in self.congruences:
            if q < 1:
                raise ValueError(f"modulus must be positive, got {q}")
            norm.append((r % q, q))
        object.__setattr__(self, "congruences", tuple(norm))

    @classmethod
    def of(cls, *pairs: tuple[int, int]) -> "CongruenceSystem":
        return cls(tuple(pairs))

    @property
    def modulus(self) -> int:
        return prod(q for _, q in self.congruences)

    def check_coprime(self) -> None:
        mods = [q for _, q in self.congruences]
        for i in range(len(mods)):
            for j in range(i + 1, len(mods)):
                if gcd(mods[i], mods[j]) != 1:
                    raise ValueError(
                        f"moduli {mods[i]} and {mods[j]} are not coprime"
                    )


def _pollard_brent(n: int, c: int, budget: list[int]) -> Optional[int]:
    """One Brent-rho run with x -> x^2 + c; returns a nontrivial divisor or None.

    ``budget`` is a one-element list decremented per iteration.
    """
    y, r, q, g = 2, 1, 1, 1
    m = 128
    x = ys = y
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            steps = min(m, r - k)
            for _ in range(steps):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            budget[0] -= steps
            g = gcd(q, n)
            k += m
            if budget[0] <= 0 and g == 1:
                return None
        r *= 2
    if g == n:
        g = 1
        while g == 1:
            ys = (ys * ys + c) % n
            g = gcd(abs(x - ys), n)
    return g if g != n else None


def _split(n: int, budget: list[int], out: dict[int, int]) -> Optional[int]:
    """Fully factor n into ``out``; return an unfactored part on budget exhaustion."""
    stack = [n]
    leftover = 1
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        r = isqrt(m)
        if r * r == m:
            stack.extend((r, r))
            continue
        d = None
        c = 1
        while d is None:
            if budget[0] <= 0:
                break
            d = _pollard_brent(m, c, budget)
            c += 1
        if d is None:
            leftover *= m
            continue
        stack.extend((d, m // d))
    return leftover if leftover != 1 else None


def factorize(n: int, budget: int = DEFAULT_RHO_BUDGET) -> Factorization:
    """Complete factorization by trial division, then Brent rho (seeds c = 1, 2, ...).

    Raises FactorizationBudgetError, carrying the partial result, once
    ``budget`` rho iterations have been spent without finishing.
    """
    if n < 1:
        raise ValueError(f"factorize needs n >= 1, got {n}")
    found: dict[int, int] = {}
    for p in _SMALL_PRIMES:
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            found[p] = e
    if n > 1:
        if n <= _TRIAL_LIMIT**2 or is_prime(n):
            found[n] = found.get(n, 0) + 1
        else:
            left = _split(n, [budget], found)
            if left is not None:
                partial = Factorization(tuple(sorted(found.items())), left)
                raise FactorizationBudgetError(partial)
    return Factorization(tuple(sorted(found.items())))


def is_squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factorize(n).factors)


def square_split(n: int, budget: int = DEFAULT_RHO_BUDGET) -> tuple[int, int]:
    """Return (t, m) with n = t*m**2, t squarefree and m maximal."""
    if n < 1:
        raise ValueError(f"square_split needs n >= 1, got {n}")
    t = m = 1
    for p, e in factorize(n, budget).factors:
        m *= p ** (e // 2)
        if e % 2:
            t *= p
    return t, m


def mod_pow(b: int, e: int, q: int) -> int:
    if q < 1:
        raise ValueError("modulus must be >= 1")
    return pow(b, e, q)


def kth_power_residue(m: int, k: int, prime: int) -> bool:
    """True iff y**k = m (mod prime) is soluble, by Euler's criterion."""
    if m % prime == 0:
        raise ValueError(f"{prime} divides {m}")
    d = gcd(k, prime - 1)
    return pow(m, (prime - 1) // d, prime) == 1


def hensel_lift_power(z0: int, k: int, m: int, prime: int, level: int) -> int:
    """Lift a root of z**k = m (mod prime) to the unique root mod prime**level.

    Returns the representative in [1, prime**level] congruent to z0 mod prime.
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    if (k * pow(z0, k - 1, prime)) % prime == 0:
        raise ValueError(f"derivative vanishes mod {prime}; cannot lift")
    if (pow(z0, k, prime) - m) % prime:
        raise ValueError(f"{z0}^{k} is not {m} mod {prime}")
    z = z0 % prime
    power = prime
    target = prime**level
    while power < target:
        power = min(power * power, target)
        f = (pow(z, k, power) - m) % power
        df = k * pow(z, k - 1, power) % power
        z = (z - f * pow(df, -1, power)) % power
    return z if z else target


def crt_solve(system: CongruenceSystem) -> int:
    """The unique solution in [1, prod(moduli)]."""
    system.check_coprime()
    x, big = 0, 1
    for r, q in system.congruences:
        # x + big*s = r (mod q)
        s = (r - x) * pow(big, -1, q) % q if q > 1 else 0
        x += big * s
        big *= q
    x %= big
    return x if x else big


def _cornacchia_prime(p: int) -> tuple[int, int]:
    """x**2 + y**2 = p for a prime p = 1 (mod 4), x > y > 0."""
    # square root of -1 from any non-residue
    a = 2
    while pow(a, (p - 1) // 2, p) != p - 1:
        a += 1
    r = pow(a, (p - 1) // 4, p)
    r0, r1 = p, r
    bound = isqrt(p)
    while r1 > bound:
        r0, r1 = r1, r0 % r1
    x = r1
    y = isqrt(p - x * x)
    return (x, y) if x >= y else (y, x)


def _gauss_mul(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _gauss_pow(a: tuple[int, int], e: int) -> tuple[int, int]:
    r = (1, 0)
    for _ in range(e):
        r = _gauss_mul(r, a)
    return r


def _quick_reject(n: int) -> bool:
    """True if n is certainly not a sum of two squares (cheap partial check)."""
    while n % 2 == 0:
        n //= 2
    for p in _SMALL_PRIMES[1:200]:
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            if p % 4 == 3 and e % 2:
                return True
    # primes = 3 mod 4 at even power and primes = 1 mod 4 both contribute 1
    # mod 4, so a leftover = 3 (mod 4) hides a bad prime at odd power.
    return n % 4 == 3


def two_squares_all(n: int, budget: int = DEFAULT_RHO_BUDGET) -> list[tuple[int, int]]:
    """All (x, y) with x >= y >= 0 and x**2 + y**2 = n, sorted by x descending."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return [(0, 0)]
    if _quick_reject(n):
        return []
    fac = factorize(n, budget)
    scale = 1
    choices: list[list[tuple[int, int]]] = []
    for p, e in fac.factors:
        if p == 2:
            choices.append([_gauss_pow((1, 1), e)])
        elif p % 4 == 3:
            if e % 2:
                return []
            scale *= p ** (e // 2)
        else:
            a, b = _cornacchia_prime(p)
            pi, pibar = (a, b), (a, -b)
            choices.append(
                [_gauss_mul(_gauss_pow(pi, j), _gauss_pow(pibar, e - j)) for j in range(e + 1)]
            )
    reps = {(1, 0)}
    for opts in choices:
        reps = {_gauss_mul(r, o) for r in reps for o in opts}
    out = set()
    for x, y in reps:
        x, y = abs(x) * scale, abs(y) * scale
        out.add((x, y) if x >= y else (y, x))
    return sorted(out, reverse=True)


def two_squares(
    n: int, require_positive: bool = False, budget: int = DEFAULT_RHO_BUDGET
) -> Optional[tuple[int, int]]:
    """Largest-x representation n = x**2 + y**2 with x >= y, or None."""
    for x, y in two_squares_all(n, budget):
        if not require_positive or y >= 1:
            return x, y
    return None


def iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0, exactly."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n < 2 or k == 1:
        return n
    if k == 2:
        return isqrt(n)
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x**k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def valuation(n: int, p: int) -> int:
    """Exponent of p in n; n must be nonzero."""
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


_SIEVE_BLOCK = 1 << 12


def find_prime_in_ap(
    system: CongruenceSystem, lo: int, hi: int, avoid: int = 1
) -> Optional[int]:
    """Smallest prime p in (lo, hi] satisfying the system with gcd(p, avoid) = 1.

    Candidates are sieved in blocks by small primes before the strong
    probable-prime test. A residue sharing a factor with its modulus yields None.
    """
    if lo >= hi:
        raise ValueError("need lo < hi")
    if system.congruences:
        r = crt_solve(system) % system.modulus
        mod = system.modulus
    else:
        r, mod = 0, 1
    if gcd(r, mod) != 1:
        return None
    first = lo + 1 + (r - lo - 1) % mod
    if first > hi:
        return None
    count = (hi - first) // mod + 1
    sieve_primes = [q for q in _SMALL_PRIMES[:300] if mod % q]
    start_idx = 0
    while start_idx < count:
        n_blk = min(_SIEVE_BLOCK, count - start_idx)
        base = first + start_idx * mod
        alive = bytearray([1]) * n_blk
        for q in sieve_primes:
            # base + j*mod = 0 (mod q)
            j0 = (-base) * pow(mod, -1, q) % q
            if base + j0 * mod == q:
                j0 += q
            if j0 < n_blk:
                alive[j0::q] = bytes(len(range(j0, n_blk, q)))
        for j in range(n_blk):
            if alive[j]:
                c = base + j * mod
                if c > 1 and gcd(c, avoid) == 1 and is_prime(c):
                    return c
        start_idx += n_blk
    return None


def primes_in_range(lo: int, hi: int) -> Iterable[int]:
    """Primes p with lo < p <= hi in increasing order."""
    c = lo + 1
    while c <= hi:
        if is_prime(c):
            yield c
        c += 1


def product(values: Sequence[int]) -> int:
    return prod(values)
