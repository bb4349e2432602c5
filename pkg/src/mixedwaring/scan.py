"""Exhaustive search for n <= X of the form x1^2 + x2^2 + x3^3 + x4^3 + sum y_j^k_j.

All variables are positive integers. The two squares are handled by a bitmap;
everything else is enumerated into a sorted list of "cores" T, and an n is
representable iff n - T is in the bitmap for some T.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from math import isqrt
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetExhausted, InputError
from .ntheory import iroot, two_squares

DEFAULT_X_CAP = 10**7
DEFAULT_MEMORY_CAP = 1 << 29  # bytes

# once this few candidates remain, finish them one at a time
_SWITCH = 512


def two_squares_bitmap(X: int) -> np.ndarray:
    """S[n] is True iff n = a^2 + b^2 with a, b >= 1 (0 <= n <= X)."""
    S = np.zeros(X + 1, dtype=bool)
    for a in range(1, isqrt(X) + 1):
        rest = X - a * a
        if rest < 1:
            break
        b = np.arange(a, isqrt(rest) + 1, dtype=np.int64)
        S[a * a + b * b] = True
    return S


def _cores(tail: Sequence[int], X: int) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    """Distinct T = x3^3 + x4^3 + sum y^k <= X - 2 with the first decomposition found.

    Decompositions list (x3, x4, y_1, ..., y_t) in the order of ``tail``.
    """
    limit = X - 2
    seen: dict[int, tuple[int, ...]] = {}
    cube_top = iroot(limit, 3) + 1
    tails: dict[int, tuple[int, ...]] = {0: ()}
    for k in tail:
        nxt: dict[int, tuple[int, ...]] = {}
        for base_val, ys in tails.items():
            y = 1
            while base_val + y**k <= limit:
                nxt.setdefault(base_val + y**k, ys + (y,))
                y += 1
        tails = nxt
    for a in range(1, cube_top + 1):
        a3 = a**3
        if a3 + 1 > limit:
            break
        for b in range(a, cube_top + 1):
            ab = a3 + b**3
            if ab > limit:
                break
            for tv, ys in tails.items():
                T = ab + tv
                if T <= limit and T not in seen:
                    seen[T] = (b, a) + ys
    Ts = np.array(sorted(seen), dtype=np.int64)
    return Ts, [seen[int(T)] for T in Ts]


@dataclass
class ScanReport:
    tail: tuple[int, ...]
    X: int
    exceptions: list[int]
    seconds: float
    cores: int
    _core_values: np.ndarray = field(repr=False)
    _core_decomp: list[tuple[int, ...]] = field(repr=False)
    _witness: np.ndarray = field(repr=False)

    @property
    def counts(self) -> dict:
        return {"checked": self.X, "representable": self.X - len(self.exceptions), "exceptions": len(self.exceptions)}

    def witness(self, n: int) -> Optional[tuple[int, ...]]:
        """(x1, x2, x3, x4, y_1, ..., y_t) for a representable n, else None."""
        if not 1 <= n <= self.X:
            raise ValueError("n outside the scanned range")
        idx = int(self._witness[n])
        if idx < 0:
            return None
        T = int(self._core_values[idx])
        xy = two_squares(n - T, require_positive=True)
        if xy is None:
            raise AssertionError(f"stored witness for {n} does not decompose")
        return xy + self._core_decomp[idx]

    def check_witness(self, n: int) -> bool:
        w = self.witness(n)
        if w is None:
            return False
        x1, x2, x3, x4, *ys = w
        return x1**2 + x2**2 + x3**3 + x4**3 + sum(y**k for y, k in zip(ys, self.tail)) == n and min(w) >= 1

    def as_dict(self) -> dict:
        return {
            "form": [2, 2, 3, 3] + list(self.tail),
            "X": str(self.X),
            "exceptions": [str(n) for n in self.exceptions],
            "counts": self.counts,
            "cores": self.cores,
            "seconds": round(self.seconds, 3),
        }


def scan(
    tail: Sequence[int],
    X: int,
    x_cap: int = DEFAULT_X_CAP,
    memory_cap: int = DEFAULT_MEMORY_CAP,
) -> ScanReport:
    """List every n in [1, X] with no representation in positive integers."""
    tail = tuple(int(k) for k in tail)
    if any(k < 2 for k in tail):
        raise InputError("tail exponents must be >= 2")
    if X < 1:
        raise InputError("X must be >= 1")
    if X > x_cap:
        raise InputError(f"X = {X} exceeds the scan cap {x_cap}")
    need = (X + 1) * (1 + 1 + 4)  # bitmap, candidate mask, witness index
    if need > memory_cap:
        raise BudgetExhausted("scan memory cap exceeded", bytes=need, cap=memory_cap)
    t0 = time.perf_counter()
    S = two_squares_bitmap(X)
    Ts, decomp = _cores(tail, X)
    witness = np.full(X + 1, -1, dtype=np.int32)

    U = np.arange(1, X + 1, dtype=np.int64)
    i = 0
    # greedy phase: sweep cores in increasing order over the shrinking candidate set
    while i < len(Ts) and len(U) > _SWITCH:
        T = Ts[i]
        start = np.searchsorted(U, T + 2)
        if start == len(U):
            break
        seg = U[start:]
        hit = S[seg - T]
        if hit.any():
            witness[seg[hit]] = i
            U = np.concatenate([U[:start], seg[~hit]])
        i += 1
    # finishing phase: each survivor against the cores not yet tried
    rest = Ts[i:]
    left = []
    for u in U:
        top = np.searchsorted(rest, u - 2, side="right")
        hits = np.flatnonzero(S[u - rest[:top]])
        if len(hits):
            witness[u] = i + int(hits[0])
        else:
            left.append(int(u))
    return ScanReport(tail, X, left, time.perf_counter() - t0, len(Ts), Ts, decomp, witness)


def brute_exceptions(tail: Sequence[int], X: int) -> list[int]:
    """Reference enumeration by nested loops (small X only)."""
    reach = set()
    sq = [a * a for a in range(1, isqrt(X) + 1)]
    cu = [a**3 for a in range(1, iroot(X, 3) + 1)]
    tails = [[y**k for y in range(1, iroot(X, k) + 1)] for k in tail]
    for parts in itertools.product(sq, sq, cu, cu, *tails):
        s = sum(parts)
        if s <= X:
            reach.add(s)
    return [n for n in range(1, X + 1) if n not in reach]
