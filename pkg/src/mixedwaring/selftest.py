"""Small fast consistency checks behind ``waring selftest``."""

from __future__ import annotations

from fractions import Fraction
from math import isqrt

from .certificate import verify_certificate
from .feasibility import GRH_THRESHOLD, gamma
from .ntheory import CongruenceSystem, crt_solve, hensel_lift_power, is_prime, kth_power_residue, two_squares
from .pipeline import represent
from .ternary import check_mod16_shifted_coverage, count_representations


def _brute_count(N: int, p: int) -> int:
    return sum(
        1
        for z in range(1, isqrt(N // (6 * p)) + 1)
        for x in range(1, isqrt(N) + 1)
        for y in range(1, isqrt(N) + 1)
        if x * x + y * y + 6 * p * z * z == N
    )


def run_selftest() -> list[tuple[str, bool, str]]:
    rows = []

    def add(name, ok, detail=""):
        rows.append((name, bool(ok), detail))

    add("gamma(6,6)", gamma((6, 6)) == Fraction(25, 36) < GRH_THRESHOLD, "25/36 < 12/17")
    add("primality", [q for q in range(200) if is_prime(q)] == [q for q in range(200) if q > 1 and all(q % d for d in range(2, q))], "q < 200")
    add("crt", crt_solve(CongruenceSystem.of((1, 2), (0, 3), (2, 5), (4, 7))) == 207, "207 mod 210")
    add("hensel", all(pow(hensel_lift_power(3, 2, 2, 7, l), 2, 7**l) == 2 for l in (1, 2, 3)), "sqrt 2 mod 7^l")
    add("power-residue", all(kth_power_residue(a, 3, 13) == any(pow(y, 3, 13) == a for y in range(1, 13)) for a in range(1, 13)), "cubes mod 13")
    add("two-squares", all((two_squares(n) is not None) == any(isqrt(n - a * a) ** 2 == n - a * a for a in range(isqrt(n) + 1)) for n in range(1, 500)), "n < 500")
    add("ternary-count", all(count_representations(N, 5) == _brute_count(N, 5) for N in range(31, 400, 7)), "p = 5")
    add("mod16", all(check_mod16_shifted_coverage(p, lam) for p in (3, 5, 7, 11, 13) for lam in (1, 3, 5, 7)), "small p, lambda")
    cert = represent(10**15 + 7, (6, 6), "grh")
    add("represent", verify_certificate(cert.to_json()).ok, "n = 10^15 + 7, (6,6), desk policy")
    return rows
