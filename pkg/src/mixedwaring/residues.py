"""Step constructions for the level-lowering descent.

Each constructor picks a tail value y (or a pair y1, y2) so that the residual
n - y**k is divisible by prime**l with l = 6*K*h, is coprime to 10 and to the
base primes below, avoids 2 mod 3, and is a power residue at the next base
prime. The constructors re-check their output with :func:`check_witness`
before returning it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, prod
from typing import Optional, Sequence

from .errors import ConstructionError, WeilFailure
from .feasibility import ExponentTuple
from .ntheory import (
    CongruenceSystem,
    crt_solve,
    hensel_lift_power,
    is_prime,
    kth_power_residue,
    next_prime,
)
from .policy import BoundPolicy

__all__ = [
    "BasePrimes",
    "StepWitness",
    "find_residue_prime",
    "solve_weil",
    "weil_universal",
    "construct_step_top",
    "construct_step_mid",
    "construct_step_pair",
    "check_witness",
    "first_failure",
]


@dataclass(frozen=True)
class BasePrimes:
    """The fixed primes varpi_1 < ... < varpi_{t-1} (1-based access via ``at``)."""

    primes: tuple[int, ...] = ()

    def at(self, i: int) -> int:
        return self.primes[i - 1]

    def omega(self, u: int) -> int:
        """Omega_u = varpi_1 * ... * varpi_u, with Omega_0 = 1."""
        return prod(self.primes[:u])

    def __len__(self) -> int:
        return len(self.primes)


@dataclass(frozen=True)
class StepWitness:
    """One step of the descent.

    ``kind`` is "top" (fresh prime, consumes k_t), "mid" (base prime varpi_u,
    consumes k_u) or "pair" (base prime varpi_{t-1}, consumes k_{t-1} and k_t).
    ``stage`` is the index of the exponent consumed (t-1 for a pair) and
    ``next_stage`` the stage the residual lands on.
    """

    kind: str
    stage: int
    next_stage: int
    prime: int
    h: int
    level: int
    target: int
    exponents: tuple[int, ...]
    ys: tuple[int, ...]
    root: int
    g: int
    residual: int
    weil: Optional[tuple[int, int]] = None
    pair_weil: Optional[tuple[int, int]] = None

    @property
    def prime_power(self) -> int:
        return self.prime**self.level

    def tail(self) -> int:
        return sum(y**k for y, k in zip(self.ys, self.exponents))

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "stage": self.stage,
            "next_stage": self.next_stage,
            "prime": str(self.prime),
            "h": self.h,
            "level": self.level,
            "target": str(self.target),
            "exponents": list(self.exponents),
            "ys": [str(y) for y in self.ys],
            "root": str(self.root),
            "g": str(self.g),
            "residual": str(self.residual),
            "weil": None if self.weil is None else [str(x) for x in self.weil],
            "pair_weil": None if self.pair_weil is None else [str(x) for x in self.pair_weil],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StepWitness":
        opt = lambda v: None if v is None else tuple(int(x) for x in v)  # noqa: E731
        return cls(
            kind=str(d["kind"]),
            stage=int(d["stage"]),
            next_stage=int(d["next_stage"]),
            prime=int(d["prime"]),
            h=int(d["h"]),
            level=int(d["level"]),
            target=int(d["target"]),
            exponents=tuple(int(x) for x in d["exponents"]),
            ys=tuple(int(x) for x in d["ys"]),
            root=int(d["root"]),
            g=int(d["g"]),
            residual=int(d["residual"]),
            weil=opt(d.get("weil")),
            pair_weil=opt(d.get("pair_weil")),
        )


# --- primes with power residues ----------------------------------------------


def find_residue_prime(m: int, k: int, D: int = 1, cap: int = 10**6, after: int = 2) -> int:
    """Smallest odd prime varpi in (after, cap] with varpi coprime to m*D*k and
    m a k-th power residue mod varpi.

    For odd k only varpi = 2 (mod k) is tried, so the residue condition holds
    for every m. For even k the primes are scanned in order.
    """
    if m < 1:
        raise ValueError("m must be positive")
    avoid = m * D * k
    p = max(after, 2)
    while True:
        if k % 2:
            # next candidate = 2 (mod k), odd
            p = p + 1 + (2 - p - 1) % k
            if p % 2 == 0:
                p += k
            if p > cap:
                break
            if not is_prime(p):
                continue
        else:
            p = next_prime(p)
            if p > cap:
                break
        if gcd(p, avoid) == 1 and kth_power_residue(m, k, p):
            return p
    raise ConstructionError(
        "residue-prime search exhausted", searched=f"({after}, {cap}]", k=k
    )


def _roots_mod_prime(a: int, k: int, p: int) -> list[int]:
    a %= p
    if gcd(k, p - 1) == 1:
        return [pow(a, pow(k, -1, p - 1), p)]
    return [z for z in range(1, p) if pow(z, k, p) == a]


def _smallest_lifted_root(a: int, k: int, p: int, level: int) -> int:
    roots = _roots_mod_prime(a, k, p)
    if not roots:
        raise ConstructionError("no k-th root modulo the step prime", prime=p, k=k)
    P = p**level
    return min(hensel_lift_power(z, k, a % P, p, level) for z in roots)


# --- Weil congruences ------------------------------------------------------


def solve_weil(
    c1: int, c2: int, target: int, k1: int, k2: int, p: int
) -> Optional[tuple[int, int]]:
    """Lexicographically smallest (w, v), 1 <= w, v < p, with
    c1*w**k1 + c2*v**k2 = target (mod p); None if the grid has no solution."""
    if (c1 * c2) % p == 0:
        raise ValueError(f"{p} divides c1*c2")
    smallest_v: dict[int, int] = {}
    for v in range(p - 1, 0, -1):
        smallest_v[c2 * pow(v, k2, p) % p] = v
    for w in range(1, p):
        need = (target - c1 * pow(w, k1, p)) % p
        v = smallest_v.get(need)
        if v is not None:
            return w, v
    return None


def weil_universal(k1: int, k2: int, p: int) -> bool:
    """True if w**k1 + c*v**k2 = a (mod p) is soluble with p not dividing wv
    for every pair of units c, a."""
    h1 = {pow(w, k1, p) for w in range(1, p)}
    h2 = {pow(v, k2, p) for v in range(1, p)}
    units = set(range(1, p))
    for c in units:
        reach = {(a + c * b) % p for a in h1 for b in h2}
        if not units <= reach:
            return False
    return True


# --- shared pieces -----------------------------------------------------------


def _height(policy: BoundPolicy, m: int, k: int, K: int, prime: int, omega: Fraction, log_power: int) -> int:
    cap_log = policy.height_cap_log(m, k, omega, log_power)
    unit = 6 * K * math.log(prime)
    h = int(cap_log // unit) if cap_log > 0 else 0
    h = max(h, 0)
    # guard the float floor in both directions
    while h > 0 and h * unit > cap_log:
        h -= 1
    if h == 0 and not policy.allow_zero_height:
        raise ConstructionError(
            "h-underflow: window admits no h >= 1", prime=prime, k=k
        )
    return h


def _g3(r: int) -> int:
    return 1 if r % 3 == 2 else 0


def _gq(r: int, q: int) -> int:
    return 1 if r % q == 0 else 0


def _crt_shift(
    base_value: int,
    P: int,
    plain: Sequence[int],
    ref: int,
    weil_mod: Optional[int],
    weil_v: Optional[int],
) -> int:
    """g in [1, prod(moduli)] putting base_value + g*P into the g_q classes."""
    pairs = []
    for q in (2, 3, 5, *plain):
        want = _g3(ref) if q == 3 else _gq(ref, q)
        pairs.append(((want - base_value) * pow(P, -1, q) % q, q))
    if weil_mod is not None:
        pairs.append(((weil_v - base_value) * pow(P, -1, weil_mod) % weil_mod, weil_mod))
    return crt_solve(CongruenceSystem(tuple(pairs)))


def _weil_next(
    rest: int, P: int, qnext: int, k_next: int, k_here: int
) -> tuple[int, int]:
    """Weil pair at qnext for P**-1 * rest = w**k_next + P**-1 * v**k_here."""
    inv = pow(P, -1, qnext)
    sol = solve_weil(1, inv, rest * inv % qnext, k_next, k_here, qnext)
    if sol is None:
        raise WeilFailure("Weil congruence insoluble at base prime", prime=qnext)
    return sol


def _finish(w: StepWitness, k: ExponentTuple, base: BasePrimes, policy: BoundPolicy, omega: Fraction) -> StepWitness:
    bad = first_failure(check_witness(w, k, base, policy, omega))
    if bad is not None:
        raise ConstructionError(
            f"construction failed: condition {bad[0]}", stage=w.stage, detail=bad[1]
        )
    return w


# --- constructors --------------------------------------------------------------


def construct_step_top(
    n: int,
    k: ExponentTuple,
    base: BasePrimes,
    policy: BoundPolicy,
    omega: Fraction = Fraction(1),
    prime: Optional[int] = None,
    after: int = 2,
) -> StepWitness:
    """First step with a fresh prime varpi_t, consuming k_t."""
    t, K, kt = k.t, k.K, k.k(k.t)
    if len(base) != t - 1:
        raise ValueError("need t-1 base primes")
    if t >= 2 and n % base.at(t - 1) == 0:
        raise ConstructionError("varpi_{t-1} divides n", stage=t)
    Om = base.omega(t - 1)
    if prime is None:
        prime = find_residue_prime(n, kt, 30 * Om, policy.residue_cap, after)
    h = _height(policy, n, kt, K, prime, omega, t + 2)
    level = 6 * K * h
    P = prime**level
    z = _smallest_lifted_root(n, kt, prime, level) if level else 1
    weil = None
    if t >= 2:
        weil = _weil_next(n, P, base.at(t - 1), k.k(t - 1), kt)
    g = _crt_shift(z, P, base.primes[: t - 2], n, base.at(t - 1) if t >= 2 else None, weil[1] if weil else None)
    y = z + g * P
    rest = n - y**kt
    w = StepWitness("top", t, t - 1, prime, h, level, n, (kt,), (y,), z, g, rest // P, weil)
    return _finish(w, k, base, policy, omega)


def construct_step_mid(
    m: int,
    u: int,
    k: ExponentTuple,
    base: BasePrimes,
    policy: BoundPolicy,
    omega: Fraction = Fraction(1),
) -> StepWitness:
    """Step at the base prime varpi_u, consuming k_u."""
    K, ku = k.K, k.k(u)
    prime = base.at(u)
    if m <= 0:
        raise ConstructionError("residual is not positive", stage=u)
    if m % prime == 0 or (u >= 2 and m % base.at(u - 1) == 0):
        raise ConstructionError("precondition: base prime divides residual", stage=u)
    if not kth_power_residue(m, ku, prime):
        raise ConstructionError("precondition: not a power residue at varpi_u", stage=u)
    h = _height(policy, m, ku, K, prime, omega, u + 1)
    level = 6 * K * h
    P = prime**level
    z = _smallest_lifted_root(m, ku, prime, level) if level else 1
    weil = None
    if u >= 2:
        weil = _weil_next(m, P, base.at(u - 1), k.k(u - 1), ku)
    g = _crt_shift(z, P, base.primes[: u - 2] if u >= 2 else (), m, base.at(u - 1) if u >= 2 else None, weil[1] if weil else None)
    y = z + g * P
    w = StepWitness("mid", u, u - 1, prime, h, level, m, (ku,), (y,), z, g, (m - y**ku) // P, weil)
    return _finish(w, k, base, policy, omega)


def construct_step_pair(
    n: int,
    k: ExponentTuple,
    base: BasePrimes,
    policy: BoundPolicy,
    omega: Fraction = Fraction(1),
) -> StepWitness:
    """Step at varpi_{t-1} consuming k_{t-1} and k_t together (no GRH needed)."""
    t, K = k.t, k.K
    if t < 2:
        raise ValueError("pair step needs t >= 2")
    k1, k2 = k.k(t - 1), k.k(t)
    prime = base.at(t - 1)
    if n % prime == 0:
        raise ConstructionError("varpi_{t-1} divides n", stage=t - 1)
    h = _height(policy, n, k2, K, prime, omega, t + 2)
    level = 6 * K * h
    P = prime**level
    pair_weil = None
    if level:
        pair_weil = solve_weil(1, 1, n % prime, k1, k2, prime)
        if pair_weil is None:
            raise WeilFailure("Weil congruence insoluble at base prime", prime=prime)
        u0, v0 = pair_weil
        y2 = v0 + P
        rest = n - y2**k2
        z = hensel_lift_power(u0, k1, rest % P, prime, level) + P
    else:
        y2 = z = 1
        rest = n - 1
    weil = None
    if t >= 3:
        weil = _weil_next(rest, P, base.at(t - 2), k.k(t - 2), k1)
    g = _crt_shift(z, P, base.primes[: t - 3] if t >= 3 else (), rest, base.at(t - 2) if t >= 3 else None, weil[1] if weil else None)
    y1 = z + g * P
    residual = (n - y1**k1 - y2**k2) // P
    w = StepWitness("pair", t - 1, t - 2, prime, h, level, n, (k1, k2), (y1, y2), z, g, residual, weil, pair_weil)
    return _finish(w, k, base, policy, omega)


# --- independent re-check ----------------------------------------------------


def check_witness(
    w: StepWitness,
    k: ExponentTuple,
    base: BasePrimes,
    policy: BoundPolicy,
    omega: Fraction = Fraction(1),
) -> list[tuple[str, bool, str]]:
    """Re-derive conditions (a)-(d) of a step from scratch.

    Returns (condition, ok, detail) rows; nothing from the constructor is
    trusted beyond the recorded numbers.
    """
    rows: list[tuple[str, bool, str]] = []

    def add(name: str, ok: bool, detail: str = "") -> None:
        rows.append((name, bool(ok), detail))

    t, K = k.t, k.K
    kind = w.kind
    expected = {
        "top": ((k.k(t),), t, t - 1),
        "mid": ((k.k(w.stage),) if 1 <= w.stage <= t else (), w.stage, w.stage - 1),
        "pair": ((k.k(t - 1), k.k(t)) if t >= 2 else (), t - 1, t - 2),
    }.get(kind)
    if expected is None:
        add("shape", False, f"unknown kind {kind!r}")
        return rows
    exps, stage, nxt = expected
    add("shape", w.exponents == exps and w.stage == stage and w.next_stage == nxt
        and len(w.ys) == len(exps) and w.h >= 0 and w.level == 6 * K * w.h,
        "exponents, stage indices and level = 6Kh")
    if not rows[-1][1]:
        return rows
    if not policy.allow_zero_height and w.h == 0:
        add("b", False, "zero height not allowed by policy")
    Om_next = base.omega(nxt)
    prime, P = w.prime, w.prime**w.level
    add("prime", is_prime(prime), f"step prime {prime} is prime")
    if kind == "top":
        add("a", gcd(30 * w.target * base.omega(t - 1), prime) == 1, "(30 n Omega_{t-1}, varpi) = 1")
    else:
        add("a", prime == base.at(stage), "step prime is the base prime for this stage")
    add("a", all(y >= 1 for y in w.ys), "tail values positive")
    rest = w.target - w.tail()
    add("a", rest % P == 0, f"varpi^{w.level} divides the residual")
    add("a", w.residual * P == rest, "recorded residual equals the exact quotient")
    # Hensel root and CRT shift recombine to y
    yshift = w.ys[0]
    if w.level:
        if kind == "pair":
            add("a", P < w.root <= 2 * P and P < w.ys[1] <= 2 * P, "pair representatives in (P, 2P]")
        else:
            add("a", 1 <= w.root <= P, "Hensel root in [1, P]")
    add("a", yshift == w.root + w.g * P, "y = root + g * varpi^l")
    add("c", 1 <= w.g <= 30 * Om_next, "1 <= g <= 30 Omega")
    # (b) sizes; kind-dependent reference value and exponent
    ref_m, ref_k, u_idx = (w.target, w.exponents[-1], t) if kind in ("top", "pair") else (w.target, w.exponents[0], stage)
    plog = w.level * math.log(prime)
    add("b", all(P <= y for y in w.ys), "varpi^l <= y")
    add("b", policy.power_lower_ok(plog, ref_m, ref_k, omega, u_idx, K, t), "lower window on varpi^l")
    ok_upper = all(
        policy.y_upper_ok(y, ref_m, kk if policy.desk else ref_k, omega, t, u_idx)
        for y, kk in zip(w.ys, w.exponents)
    )
    add("b", ok_upper, "upper size bound on y")
    # (c) coprimality and the mod-3 condition
    add("c", rest > 0, "residual positive")
    add("c", gcd(rest, 10 * Om_next) == 1, "(residual, 10 Omega) = 1")
    add("c", rest % 3 != 2, "residual not 2 mod 3")
    # (d) next-stage power residue
    if nxt >= 1:
        q = base.at(nxt)
        quot = w.residual
        ok = quot % q != 0 and kth_power_residue(quot, k.k(nxt), q)
        add("d", ok, f"quotient is a k_{nxt}-th power residue mod {q}")
    return rows


def first_failure(rows: list[tuple[str, bool, str]]) -> Optional[tuple[str, str]]:
    for name, ok, detail in rows:
        if not ok:
            return name, detail
    return None
