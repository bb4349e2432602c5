"""Representation certificates: assembly, JSON form, and an independent verifier.

The verifier takes the parsed JSON document only and re-derives every claim
from integer arithmetic and primality tests. It never raises on hostile input;
problems become failed checks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt, prod
from typing import Any, Optional

from .descent import Descent, EndgameData, final_tail_values
from .errors import ConstructionError, InputError
from .feasibility import ExponentTuple, MODES, check_feasibility, plan_route
from .ntheory import is_prime, kth_power_residue, valuation
from .policy import BoundPolicy
from .residues import BasePrimes, StepWitness, check_witness
from .ternary import TernarySolution, check_mod16

FORMAT_VERSION = 1


def cube_identity(A: int, z: int) -> bool:
    return (A + z) ** 3 + (A - z) ** 3 == 2 * A**3 + 6 * A * z * z


@dataclass
class RepresentationCertificate:
    n: int
    exponents: tuple[int, ...]
    working: ExponentTuple
    mode: str
    kind: str
    policy: BoundPolicy
    omega: Fraction
    seed: int
    base: BasePrimes
    witnesses: list[StepWitness]
    stages: list[tuple[int, int, tuple[tuple[int, int], ...]]]
    endgame: EndgameData
    ternary: TernarySolution
    sqrt_lambda: int
    x: tuple[int, int, int, int]
    y: tuple[int, ...]
    extra: dict = field(default_factory=dict)

    def total(self) -> int:
        x1, x2, x3, x4 = self.x
        return x1**2 + x2**2 + x3**3 + x4**3 + sum(yj**kj for yj, kj in zip(self.y, self.exponents))

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "n": str(self.n),
            "exponents": list(self.exponents),
            "working_exponents": list(self.working.values),
            "relabel": list(self.working.order),
            "mode": self.mode,
            "route": self.kind,
            "policy": self.policy.as_dict(),
            "omega": str(self.omega),
            "seed": self.seed,
            "base_primes": [str(p) for p in self.base.primes],
            "witnesses": [w.as_dict() for w in self.witnesses],
            "stages": [
                {"r": r, "m": str(m), "upsilon": [[str(p), e] for p, e in ups]}
                for r, m, ups in self.stages
            ],
            "endgame": self.endgame.as_dict(),
            "ternary": {"v": str(self.ternary.x), "w": str(self.ternary.y), "z0": str(self.ternary.z)},
            "sqrt_lambda": str(self.sqrt_lambda),
            "x": [str(v) for v in self.x],
            "y": [str(v) for v in self.y],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def reassemble(
    d: Descent,
    end: EndgameData,
    tern: TernarySolution,
    mode: str,
    policy: BoundPolicy,
    seed: int = 0,
) -> RepresentationCertificate:
    """Build x_1..x_4 and the final tail values and check the total equals n."""
    v, w, z0 = tern.x, tern.y, tern.z
    lam, p, m0 = d.lam, end.p, d.m0
    if v * v + w * w + 6 * p * z0 * z0 + 2 * lam * lam * p**3 != m0:
        raise ConstructionError("ternary solution does not match m_0", stage=0)
    if z0 < 1:
        raise ConstructionError("z0 must be >= 1", stage=0)
    A = lam * p
    if z0 >= A:
        raise ConstructionError("z0 >= lambda p: x_4 would not be positive", stage=0)
    root = d.sqrt_lam()
    if root * root != lam:
        raise ConstructionError("Upsilon_0 is not a perfect square", stage=0)
    finals = final_tail_values(d.k, d.witnesses)
    working_y = [finals[j] for j in range(1, d.k.t + 1)]
    y = tuple(d.k.to_original(working_y))
    cert = RepresentationCertificate(
        n=d.n,
        exponents=d.k.original(),
        working=d.k,
        mode=mode,
        kind=d.kind,
        policy=policy,
        omega=d.omega,
        seed=seed,
        base=d.base,
        witnesses=list(d.witnesses),
        stages=[(s.r, s.m, s.upsilon) for s in d.stages],
        endgame=end,
        ternary=tern,
        sqrt_lambda=root,
        x=(root * v, root * w, A + z0, A - z0),
        y=y,
    )
    if cert.total() != d.n:
        raise AssertionError("certificate sum differs from n")
    return cert


# --- verification --------------------------------------------------------------


@dataclass
class VerifyReport:
    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return bool(self.checks) and all(ok for _, ok, _ in self.checks)

    @property
    def first_failure(self) -> Optional[tuple[str, str]]:
        for name, ok, detail in self.checks:
            if not ok:
                return name, detail
        return None

    def add(self, name: str, ok: bool, detail: str = "") -> bool:
        self.checks.append((name, bool(ok), detail))
        return bool(ok)

    def lines(self) -> list[str]:
        return [f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in self.checks]


def _int(v: Any) -> int:
    if isinstance(v, bool):
        raise ValueError("boolean where an integer was expected")
    if isinstance(v, int):
        return v
    if isinstance(v, str) and v.strip().lstrip("-").isdigit():
        return int(v)
    raise ValueError(f"not an integer: {v!r}")


def verify_certificate(doc: Any) -> VerifyReport:
    """Check a certificate (dict, JSON text, or RepresentationCertificate)."""
    rep = VerifyReport()
    try:
        if isinstance(doc, RepresentationCertificate):
            doc = doc.to_dict()
        elif isinstance(doc, (str, bytes)):
            doc = json.loads(doc)
        _verify(doc, rep)
    except Exception as exc:  # hostile input must not crash the verifier
        rep.add("format", False, f"{type(exc).__name__}: {exc}")
    return rep


def _verify(doc: dict, rep: VerifyReport) -> None:
    if not rep.add("format", isinstance(doc, dict) and doc.get("format_version") == FORMAT_VERSION,
                   "format_version"):
        return
    n = _int(doc["n"])
    exps = [_int(k) for k in doc["exponents"]]
    xs = [_int(v) for v in doc["x"]]
    ys = [_int(v) for v in doc["y"]]
    shape_ok = len(xs) == 4 and len(ys) == len(exps) and n >= 1 and all(k >= 2 for k in exps)
    if not rep.add("format", shape_ok, "field shapes"):
        return
    total = xs[0] ** 2 + xs[1] ** 2 + xs[2] ** 3 + xs[3] ** 3 + sum(y**k for y, k in zip(ys, exps))
    rep.add("final-sum", total == n, "x1^2 + x2^2 + x3^3 + x4^3 + sum y_j^k_j = n")
    rep.add("final-sum", all(v >= 1 for v in xs + ys), "all components positive")

    # exponents, relabeling and mode
    order = [_int(i) for i in doc["relabel"]]
    work = ExponentTuple(tuple(_int(k) for k in doc["working_exponents"]), tuple(order))
    rep.add("exponents", list(work.original()) == exps, "working tuple is a relabeling of the exponents")
    mode = doc["mode"]
    route = doc["route"]
    ok_mode = mode in MODES and check_feasibility(exps).admits(mode)
    rep.add("exponents", ok_mode, f"mode {mode} admitted by the feasibility calculus")
    if ok_mode:
        planned, kind = plan_route(ExponentTuple.of(exps), mode)
        rep.add("exponents", planned.values == work.values and kind == route, "route and relabeling match the mode")
    policy = BoundPolicy.from_dict(doc["policy"])
    omega = Fraction(doc["omega"])
    rep.add("exponents", 0 < omega <= 1, "omega in (0, 1]")
    t, K = work.t, work.K

    # base primes
    base = BasePrimes(tuple(_int(p) for p in doc["base_primes"]))
    rep.add("base-primes", len(base) == t - 1 and len(set(base.primes)) == len(base), "t-1 distinct primes")
    rep.add("primality", all(is_prime(p) for p in base.primes), "base primes are prime")
    rep.add("base-primes", all(gcd(30 * K, p) == 1 for p in base.primes), "(30K, varpi_i) = 1")
    if t >= 2 and len(base) == t - 1:
        rep.add("base-primes", n % base.at(t - 1) != 0, "varpi_{t-1} does not divide n")
    if not policy.desk:
        rep.add("base-primes", all(p > K**10 for p in base.primes), "K^10 < varpi_i")

    # witness chain
    witnesses = [StepWitness.from_dict(w) for w in doc["witnesses"]]
    expected_kinds = (["top"] if route == "top" else ["pair"]) + ["mid"] * ((t - 1) if route == "top" else (t - 2))
    rep.add("chain", [w.kind for w in witnesses] == expected_kinds, "step kinds follow the route")
    target = n
    for i, w in enumerate(witnesses):
        rep.add(f"witness[{i}]:a", w.target == target, "step target equals previous residual")
        for name, ok, detail in check_witness(w, work, base, policy, omega):
            if name == "prime":
                rep.add(f"primality", ok, f"witness[{i}] {detail}")
            else:
                rep.add(f"witness[{i}]:{name}", ok, detail)
        target = w.residual
    if witnesses:
        rep.add("chain", witnesses[-1].next_stage == 0, "descent ends at stage 0")

    # stages and conservation
    stages = [(int(s["r"]), _int(s["m"]), tuple((_int(p), int(e)) for p, e in s["upsilon"])) for s in doc["stages"]]
    recomputed = [(t, n, ())]
    ups: tuple = ()
    for w in witnesses:
        ups = ups + ((w.prime, w.level),)
        recomputed.append((w.next_stage, w.residual, ups))
    rep.add("conservation", stages == recomputed, "recorded stages match the witness chain")
    for j in range(1, len(witnesses) + 1):
        r, m, u = recomputed[j]
        finals = final_tail_values(work, witnesses[:j])
        lhs = prod(p**e for p, e in u) * m + sum(y ** work.k(jj) for jj, y in finals.items())
        rep.add("conservation", lhs == n, f"n = Upsilon_{r} m_{r} + tail at stage {r}")
        rep.add("conservation", prod(p**e for p, e in u) * m <= n, f"Upsilon_{r} m_{r} <= n")
        rep.add("conservation", gcd(m, 10 * base.omega(r)) == 1 and m % 3 != 2, f"(m_{r}, 10 Omega_{r}) = 1, m_{r} != 2 mod 3")
    finals = final_tail_values(work, witnesses)
    if sorted(finals) == list(range(1, t + 1)):
        rep.add("assembly", work.to_original([finals[j] for j in range(1, t + 1)]) == ys, "y_j^final from the witnesses")
    else:
        rep.add("assembly", False, "witnesses do not consume every exponent")

    # Upsilon_0 = lambda
    m0 = recomputed[-1][1]
    ups0 = recomputed[-1][2]
    lam = prod(p**e for p, e in ups0)
    root = _int(doc["sqrt_lambda"])
    rep.add("upsilon", root * root == lam and lam % 2 == 1, "lambda = Upsilon_0 is an odd perfect square")
    rep.add("upsilon", all(e % 2 == 0 for _, e in ups0), "every Upsilon exponent is even")
    rep.add("upsilon", gcd(lam, 30 * m0) == 1, "(lambda, 30 m) = 1")

    # endgame
    end = EndgameData.from_dict(doc["endgame"])
    p, h = end.p, end.h
    rep.add("endgame", end.lam == lam, "endgame lambda equals Upsilon_0")
    rep.add("primality", is_prime(p), "p is prime")
    rep.add("endgame", p % 3 == 1 and m0 % p != 0, "p = 1 (mod 3) and p does not divide m")
    rep.add("endgame", h >= 1 and 1 <= end.B <= 5 ** (2 * h) and end.nu in (0, 1), "1 <= B <= 5^(2h), nu in {0, 1}")
    if h >= 1:
        q = 5 ** (2 * h)
        rep.add("endgame", (2 * lam * lam * end.B**3 - m0) % q == 0, "2 lambda^2 B^3 = m (mod 5^(2h))")
        rep.add("endgame", (p - end.B - q * end.nu) % (5 * q) == 0, "p = B + 5^(2h) nu (mod 5^(2h+1))")
    rep.add("endgame", 6 * lam**3 * p**3 > n and 3 * lam**3 * p**3 < n, "(n/6)^(1/3) < lambda p < (n/3)^(1/3)")
    N = m0 - 2 * lam * lam * p**3
    rep.add("endgame", end.N == N and N > 0, "N = m - 2 lambda^2 p^3 > 0")
    if N > 0 and h >= 1:
        rep.add("endgame", valuation(N, 5) == 2 * h, "v_5(m - 2 lambda^2 p^3) = 2h")
        rep.add("endgame", end.M == 5**h and end.T * end.M**2 == N and gcd(end.T, end.M) == 1, "N = T M^2, M = 5^h, (T, M) = 1")
    rep.add("endgame", gcd(N, 6 * p) == 1, "(N, 6p) = 1")
    rep.add("endgame", check_mod16(N, p), "N = x^2 + y^2 + 6pz^2 soluble mod 16")

    # ternary solution and assembly
    tv, tw, tz = (_int(doc["ternary"][key]) for key in ("v", "w", "z0"))
    rep.add("ternary", tv * tv + tw * tw + 6 * p * tz * tz == N and min(tv, tw, tz) >= 1, "v^2 + w^2 + 6 p z0^2 = N in positive integers")
    A = lam * p
    rep.add("assembly", xs == [root * tv, root * tw, A + tz, A - tz], "x = (sqrt(lambda) v, sqrt(lambda) w, lambda p + z0, lambda p - z0)")
    rep.add("assembly", tz < A, "z0 < lambda p")


def load_certificate(text: str) -> dict:
    """Parse certificate JSON, raising InputError with the location on failure."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"certificate parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise InputError("certificate must be a JSON object")
    return doc
