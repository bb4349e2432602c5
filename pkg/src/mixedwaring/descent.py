"""The iterative descent from n to the ternary instance N = x^2 + y^2 + 6 p z^2.

Stages run t -> 0. After the stage consuming exponent u the residual is
m_{u-1} = varpi_u^{-l_u} (m_u - y_uu^{k_u}), and the bookkeeping identity

    n = Upsilon_r * m_r + sum over consumed j of (y_j^final)^{k_j}

holds exactly at every stage r, with Upsilon_r the product of the prime
powers consumed so far.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, prod
from typing import Optional

from .errors import ConstructionError, InputError
from .feasibility import ExponentTuple, default_c, gamma_omega_solve
from .ntheory import (
    CongruenceSystem,
    find_prime_in_ap,
    hensel_lift_power,
    iroot,
    is_prime,
    kth_power_residue,
    next_prime,
    square_split,
    valuation,
)
from .policy import BoundPolicy
from .residues import (
    BasePrimes,
    StepWitness,
    construct_step_mid,
    construct_step_pair,
    construct_step_top,
)
from .ternary import check_mod16

__all__ = [
    "select_base_primes",
    "Descent",
    "StageRecord",
    "run_descent",
    "EndgameData",
    "run_endgame",
    "ternary_hypotheses",
    "resolve_omega",
    "final_tail_values",
]


def select_base_primes(
    n: int, k: ExponentTuple, policy: BoundPolicy, exclude: frozenset[int] = frozenset()
) -> BasePrimes:
    """t-1 distinct primes coprime to 30K, the last one not dividing n.

    paper-faithful: the smallest such primes above K**10; desk-scale: above
    ``policy.base_floor``. Primes in ``exclude`` are skipped (used by retries).
    """
    t, K = k.t, k.K
    if t <= 1:
        return BasePrimes(())
    floor = K**10 if not policy.desk else policy.base_floor
    chosen: list[int] = []
    p = floor
    guard = 0
    while len(chosen) < t - 1:
        p = next_prime(p)
        guard += 1
        if guard > 10**6:
            raise ConstructionError("base-prime search failed", floor=floor)
        if gcd(30 * K, p) != 1 or p in exclude:
            continue
        if len(chosen) == t - 2 and n % p == 0:
            continue
        chosen.append(p)
    return BasePrimes(tuple(chosen))


def resolve_omega(k: ExponentTuple, policy: BoundPolicy, kind: str) -> Fraction:
    if policy.omega is not None:
        return policy.omega
    return gamma_omega_solve(k, policy.nu, tilde=(kind == "pair"))


@dataclass(frozen=True)
class StageRecord:
    r: int
    m: int
    upsilon: tuple[tuple[int, int], ...]

    @property
    def upsilon_value(self) -> int:
        return prod(p**e for p, e in self.upsilon)


@dataclass
class Descent:
    n: int
    k: ExponentTuple
    base: BasePrimes
    kind: str
    omega: Fraction
    witnesses: list[StepWitness] = field(default_factory=list)
    stages: list[StageRecord] = field(default_factory=list)

    @property
    def m0(self) -> int:
        return self.stages[-1].m

    @property
    def lam(self) -> int:
        return self.stages[-1].upsilon_value

    def sqrt_lam(self) -> int:
        return prod(p ** (e // 2) for p, e in self.stages[-1].upsilon)

    def gamma_ladder(self) -> list[Fraction]:
        """gamma_r = prod_{r < l <= t}(1 - 1/k_l) for r = t, ..., 0."""
        vals = self.k.values
        return [prod((1 - Fraction(1, kj) for kj in vals[r:]), start=Fraction(1)) for r in range(self.k.t, -1, -1)]


def final_tail_values(k: ExponentTuple, witnesses: list[StepWitness]) -> dict[int, int]:
    """y_j^final for every consumed exponent index j (1-based, working order)."""
    out: dict[int, int] = {}
    scaling: list[tuple[int, int]] = []
    for w in witnesses:
        idx = [w.stage] if w.kind != "pair" else [w.stage, w.stage + 1]
        for j, y in zip(idx, w.ys):
            kj = k.k(j)
            out[j] = y * prod(p ** (lv // kj) for p, lv in scaling)
        scaling.append((w.prime, w.level))
    return out


def _check_stage(n: int, k: ExponentTuple, base: BasePrimes, d: Descent) -> None:
    rec = d.stages[-1]
    ups = rec.upsilon_value
    finals = final_tail_values(k, d.witnesses)
    total = ups * rec.m + sum(y ** k.k(j) for j, y in finals.items())
    if total != n:
        raise ConstructionError("conservation identity broken", stage=rec.r)
    if ups * rec.m > n:
        raise ConstructionError("Upsilon_r m_r exceeds n", stage=rec.r)
    if gcd(rec.m, 10 * base.omega(rec.r)) != 1 or rec.m % 3 == 2:
        raise ConstructionError("residual fails (m_r, 10 Omega_r) = 1 or m_r != 2 mod 3", stage=rec.r)
    if rec.r >= 1 and not kth_power_residue(rec.m, k.k(rec.r), base.at(rec.r)):
        raise ConstructionError("residual is not a power residue at varpi_r", stage=rec.r)


def run_descent(
    n: int,
    k: ExponentTuple,
    kind: str,
    policy: BoundPolicy,
    base: Optional[BasePrimes] = None,
    top_after: int = 2,
) -> Descent:
    """Apply the first step ("top" or "pair") and then the mid steps down to r = 0."""
    if n < policy.min_n:
        raise InputError(f"n = {n} below the policy minimum {policy.min_n}")
    if kind not in ("top", "pair"):
        raise ValueError(kind)
    if base is None:
        base = select_base_primes(n, k, policy)
    omega = resolve_omega(k, policy, kind)
    d = Descent(n, k, base, kind, omega)
    d.stages.append(StageRecord(k.t, n, ()))
    if kind == "top":
        w = construct_step_top(n, k, base, policy, omega, after=top_after)
    else:
        w = construct_step_pair(n, k, base, policy, omega)
    while True:
        d.witnesses.append(w)
        ups = d.stages[-1].upsilon + ((w.prime, w.level),)
        d.stages.append(StageRecord(w.next_stage, w.residual, ups))
        _check_stage(n, k, base, d)
        u = w.next_stage
        if u == 0:
            break
        w = construct_step_mid(w.residual, u, k, base, policy, omega)
    return d


# --- endgame -----------------------------------------------------------------


@dataclass(frozen=True)
class EndgameData:
    lam: int
    h: int
    B: int
    nu: int
    p: int
    T: int
    M: int
    N: int
    c: Fraction

    @property
    def residue(self) -> int:
        return self.B + 5 ** (2 * self.h) * self.nu

    def as_dict(self) -> dict:
        return {
            "lambda": str(self.lam),
            "h": self.h,
            "B": str(self.B),
            "nu": self.nu,
            "p": str(self.p),
            "T": str(self.T),
            "M": str(self.M),
            "N": str(self.N),
            "c": str(self.c),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EndgameData":
        return cls(
            lam=int(d["lambda"]),
            h=int(d["h"]),
            B=int(d["B"]),
            nu=int(d["nu"]),
            p=int(d["p"]),
            T=int(d["T"]),
            M=int(d["M"]),
            N=int(d["N"]),
            c=Fraction(d["c"]),
        )


def p_window(n: int, lam: int) -> tuple[int, int]:
    """(lo, hi) with lo < p <= hi  <=>  (n/6)^(1/3) < lam p < (n/3)^(1/3), exactly."""
    l3 = lam**3
    lo = iroot(n // (6 * l3), 3)
    while 6 * l3 * (lo + 1) ** 3 <= n:
        lo += 1
    while lo > 0 and 6 * l3 * lo**3 > n:
        lo -= 1
    hi = iroot(n // (3 * l3), 3) + 1
    while hi > 0 and 3 * l3 * hi**3 >= n:
        hi -= 1
    return lo, hi


def five_adic_height(n: int, lam: int, c: Fraction) -> int:
    """Largest h with lam * (5^(2h+1))^c < (n/6)^(1/3) (log-scale window sizing)."""
    room = (math.log(n) - math.log(6)) / 3 - math.log(lam)
    h = math.floor((room / (float(c) * math.log(5)) - 1) / 2)
    # float guard: the defining inequality must be strict
    while h >= 0 and math.log(lam) + float(c) * (2 * h + 1) * math.log(5) >= (math.log(n) - math.log(6)) / 3:
        h -= 1
    return h


def _cube_root_lift(a: int, h: int) -> int:
    """B in [1, 5^(2h)] with B^3 = a (mod 5^(2h)); cubing is a bijection mod 5."""
    b0 = pow(a, 3, 5)  # 3 is the inverse of 3 mod 4
    return hensel_lift_power(b0, 3, a % 5 ** (2 * h), 5, 2 * h)


def run_endgame(
    d: Descent,
    policy: BoundPolicy,
    mode: str,
    after: int = 0,
) -> EndgameData:
    """5-adic step: find h, B and a prime p with lam p in the cube-root window.

    ``after`` excludes primes p <= after (used to request an alternate p).
    """
    n, lam, m = d.n, d.lam, d.m0
    if m % 5 == 0 or m % 2 == 0 or m % 3 == 2:
        raise ConstructionError("endgame precondition: (m, 10) = 1 and m != 2 mod 3", stage=0)
    if gcd(lam, 30 * m) != 1:
        raise ConstructionError("endgame precondition: (lambda, 30 m) = 1", stage=0)
    c = policy.c if policy.c is not None else default_c(mode, policy.eps)
    h_max = five_adic_height(n, lam, c)
    if policy.desk:
        h_max = max(h_max, 1)
    if h_max < 1:
        raise ConstructionError("h-window empty in the 5-adic step", stage=0)
    lo, hi = p_window(n, lam)
    lo = max(lo, after)
    if lo >= hi:
        raise ConstructionError("no-prime-in-window: window is empty", stage=0, window=f"({lo}, {hi}]")
    heights = range(h_max, 0, -1) if policy.desk else (h_max,)
    for h in heights:
        q2h = 5 ** (2 * h)
        B = _cube_root_lift(m * pow(2 * lam * lam, -1, q2h) % q2h, h)
        best: Optional[tuple[int, int]] = None
        for nu in (0, 1):
            r = B + q2h * nu
            if (2 * lam * lam * r**3 - m) % (5 * q2h) == 0:
                continue
            sysm = CongruenceSystem.of((r, 5 * q2h), (1, 3))
            p = find_prime_in_ap(sysm, lo, hi, avoid=m)
            if p is not None and (best is None or p < best[0]):
                best = (p, nu)
        if best is None:
            continue
        p, nu = best
        N = m - 2 * lam * lam * p**3
        if N <= 0:
            raise ConstructionError("N <= 0 (policy misconfiguration)", stage=0)
        if valuation(N, 5) != 2 * h:
            raise ConstructionError("5-adic valuation of N is not 2h", stage=0)
        if gcd(N, 6 * p) != 1:
            raise ConstructionError("(N, 6p) != 1", stage=0)
        if not check_mod16(N, p):
            raise ConstructionError("N fails mod-16 solubility", stage=0)
        return EndgameData(lam, h, B, nu, p, N // q2h, 5**h, N, c)
    raise ConstructionError(
        "no-prime-in-window", stage=0, window=f"({lo}, {hi}]", progression="p = B (mod 5^(2h+1)), p = 1 (mod 3)"
    )


def ternary_hypotheses(N: int, p: int, M: Optional[int] = None) -> dict:
    """Hypotheses (i)-(iii) for N = x^2 + y^2 + 6 p z^2.

    The constants C(delta) are not effective, so (iii) is reported as the
    exact ratios N M^12 / p^21 and N / p^5 with no verdict.
    """
    out: dict = {
        "N": N,
        "p": p,
        "p_prime": is_prime(p),
        "i_coprime_6p": gcd(N, 6 * p) == 1,
        "ii_mod16": check_mod16(N, p),
    }
    if M is None:
        try:
            t, M = square_split(N, budget=10**6)
            out["square_split"] = (t, M)
        except Exception:
            M = None
    if M is not None:
        out["M"] = M
        out["iii_ratio_NM12_over_p21"] = Fraction(N * M**12, p**21)
    out["iii_ratio_N_over_p5"] = Fraction(N, p**5)
    return out
