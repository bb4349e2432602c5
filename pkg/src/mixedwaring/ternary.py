"""Solving and counting N = x^2 + y^2 + 6 p z^2, plus the mod-16 local checks."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from math import gcd, isqrt
from typing import Iterator, Optional

import numpy as np

from .errors import BudgetExhausted, FactorizationBudgetError
from .ntheory import two_squares

FOUND = "found"
ABSENT = "proven-absent"
EXHAUSTED = "budget-exhausted"


@dataclass(frozen=True)
class TernarySolution:
    x: int
    y: int
    z: int

    def value(self, p: int) -> int:
        return self.x**2 + self.y**2 + 6 * p * self.z**2


@dataclass(frozen=True)
class TernaryResult:
    status: str
    solution: Optional[TernarySolution]
    tried: int
    skipped: int


def _sweep_order(Z: int, N: int, p: int, seed: int) -> Iterator[int]:
    """A fixed affine permutation of 1..Z seeded by (N, p, seed).

    The stride is close to Z / golden ratio, which spreads early probes across
    the whole range.
    """
    if Z <= 0:
        return
    digest = hashlib.sha256(f"{N}:{p}:{seed}".encode()).digest()
    offset = int.from_bytes(digest[:8], "big") % Z
    a = max(1, int(Z * 0.6180339887498949))
    while gcd(a, Z) != 1:
        a += 1
    for i in range(Z):
        yield 1 + (a * i + offset) % Z


def solve_ternary(
    N: int,
    p: int,
    positive: bool = True,
    budget_z: int = 10**6,
    rho_per_value: int = 20_000,
    seed: int = 0,
) -> TernaryResult:
    """Search z in a seeded order, solving N - 6 p z^2 = x^2 + y^2 for each.

    ``positive`` demands x, y >= 1 (z is always >= 1 here). A z whose residual
    cannot be factored within ``rho_per_value`` iterations is skipped, and any
    skip or an unfinished sweep rules out a proven-absent verdict.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    six_p = 6 * p
    Z = isqrt((N - 2) // six_p) if positive and N >= 2 else isqrt(N // six_p)
    tried = skipped = 0
    for z in _sweep_order(Z, N, p, seed):
        if tried >= budget_z:
            return TernaryResult(EXHAUSTED, None, tried, skipped)
        tried += 1
        rest = N - six_p * z * z
        try:
            xy = two_squares(rest, require_positive=positive, budget=rho_per_value)
        except FactorizationBudgetError:
            skipped += 1
            continue
        if xy is not None:
            sol = TernarySolution(xy[0], xy[1], z)
            if sol.value(p) != N:
                raise AssertionError("two_squares returned a wrong decomposition")
            return TernaryResult(FOUND, sol, tried, skipped)
    status = EXHAUSTED if skipped else ABSENT
    return TernaryResult(status, None, tried, skipped)


def count_representations(N: int, p: int, cap: int = 10**8) -> int:
    """Number of ordered triples (x, y, z) of positive integers with
    x^2 + y^2 + 6 p z^2 = N, by enumeration over z and x."""
    if N > cap:
        raise BudgetExhausted("count cap exceeded", N=N, cap=cap)
    total = 0
    z = 1
    while 6 * p * z * z + 2 <= N:
        rest = N - 6 * p * z * z
        xs = np.arange(1, isqrt(rest - 1) + 1, dtype=np.int64)
        ys2 = rest - xs * xs
        ys = np.sqrt(ys2).astype(np.int64)
        # repair float rounding in the square root
        ys += (ys + 1) * (ys + 1) <= ys2
        ys -= ys * ys > ys2
        total += int(np.count_nonzero((ys * ys == ys2) & (ys >= 1)))
        z += 1
    return total


@lru_cache(maxsize=None)
def _mod16_values(six_p_mod16: int) -> frozenset[int]:
    sq = [x * x % 16 for x in range(16)]
    return frozenset((a + b + six_p_mod16 * c) % 16 for a in sq for b in sq for c in sq)


def check_mod16(N: int, p: int) -> bool:
    """Whether N = x^2 + y^2 + 6 p z^2 (mod 16) is soluble."""
    return N % 16 in _mod16_values(6 * p % 16)


def shifted_residues_mod16(p: int, lam: int) -> frozenset[int]:
    """Classes mod 16 of x^2 + y^2 + 6 p z^2 + 2 lam^2 p^3 with x or y odd."""
    return _shifted(6 * p % 16, 2 * lam * lam * p**3 % 16)


@lru_cache(maxsize=None)
def _shifted(six_p: int, shift: int) -> frozenset[int]:
    out = set()
    for x in range(16):
        for y in range(16):
            if x % 2 == 0 and y % 2 == 0:
                continue
            for z in range(16):
                out.add((x * x + y * y + six_p * z * z + shift) % 16)
    return frozenset(out)


def check_mod16_shifted_coverage(p: int, lam: int) -> bool:
    """True iff every odd class mod 16 is attained (with x or y odd)."""
    return set(range(1, 16, 2)) <= shifted_residues_mod16(p, lam)


def r_shape_report(p: int, Ns: list[int]) -> list[tuple[int, int, float]]:
    """(N, r(N), r(N) * sqrt(p) / sqrt(N)) rows; an empirical look only."""
    rows = []
    for N in Ns:
        r = count_representations(N, p)
        rows.append((N, r, r * (p**0.5) / (N**0.5)))
    return rows
