"""Exponent tuples and the exact-rational feasibility calculus.

All route decisions are comparisons between ``Fraction`` values; floats never
enter a verdict.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import prod
from typing import Iterable, Optional

from .errors import InputError

GRH_THRESHOLD = Fraction(12, 17)
UNCONDITIONAL_THRESHOLD = Fraction(74, 105)
RAMANUJAN_THRESHOLD = Fraction(5, 6)
TWO_THIRDS = Fraction(2, 3)

MODES = ("grh", "unconditional", "ramanujan", "ramanujan+grh")


@dataclass(frozen=True)
class ExponentTuple:
    """Tail exponents k_1, ..., k_t in working order.

    ``order[i]`` is the position in the user's original list of the exponent
    now at working position i; it is the identity unless :meth:`odd_last`
    moved an odd exponent to the end.
    """

    values: tuple[int, ...]
    order: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not self.values:
            raise InputError("exponent tuple must be non-empty")
        if any(not isinstance(k, int) or k < 2 for k in self.values):
            raise InputError(f"exponents must be integers >= 2, got {self.values}")
        if not self.order:
            object.__setattr__(self, "order", tuple(range(len(self.values))))
        if sorted(self.order) != list(range(len(self.values))):
            raise InputError(f"bad relabeling {self.order}")

    @classmethod
    def of(cls, exponents: Iterable[int]) -> "ExponentTuple":
        """Sorted tuple; ``order`` maps back to the caller's ordering."""
        vals = list(exponents)
        idx = sorted(range(len(vals)), key=lambda i: (vals[i], i))
        return cls(tuple(vals[i] for i in idx), tuple(idx))

    @classmethod
    def parse(cls, text: str) -> "ExponentTuple":
        try:
            vals = [int(s) for s in text.replace(" ", "").split(",") if s]
        except ValueError:
            raise InputError(f"malformed exponent list {text!r}") from None
        return cls.of(vals)

    @property
    def t(self) -> int:
        return len(self.values)

    @property
    def K(self) -> int:
        """Product of all but the last exponent (1 when t = 1)."""
        return prod(self.values[:-1])

    def k(self, j: int) -> int:
        """1-based access, matching k_1 ... k_t."""
        return self.values[j - 1]

    @property
    def relabeled(self) -> bool:
        return list(self.values) != sorted(self.values)

    def has_odd(self) -> bool:
        return any(k % 2 for k in self.values)

    def odd_last(self) -> "ExponentTuple":
        """Move the largest odd exponent to position t; the rest stay sorted."""
        odd = [i for i, k in enumerate(self.values) if k % 2]
        if not odd:
            raise InputError("no odd exponent to relabel")
        j = max(odd, key=lambda i: (self.values[i], i))
        rest = [i for i in range(self.t) if i != j]
        pos = rest + [j]
        return ExponentTuple(
            tuple(self.values[i] for i in pos), tuple(self.order[i] for i in pos)
        )

    def original(self) -> tuple[int, ...]:
        out = [0] * self.t
        for i, o in enumerate(self.order):
            out[o] = self.values[i]
        return tuple(out)

    def to_original(self, working: list) -> list:
        """Reorder per-exponent data from working order to the user's order."""
        out = [None] * self.t
        for i, o in enumerate(self.order):
            out[o] = working[i]
        return out


def _as_tuple(k) -> ExponentTuple:
    return k if isinstance(k, ExponentTuple) else ExponentTuple.of(k)


def gamma(k) -> Fraction:
    return prod((1 - Fraction(1, kj) for kj in _as_tuple(k).values), start=Fraction(1))


def gamma_tilde(k) -> Fraction:
    """gamma with the factor for k_{t-1} removed."""
    kt = _as_tuple(k)
    if kt.t < 2:
        raise InputError("gamma_tilde needs t >= 2")
    vals = kt.values[:-2] + kt.values[-1:]
    return prod((1 - Fraction(1, kj) for kj in vals), start=Fraction(1))


def gamma_omega(k, omega: Fraction, tilde: bool = False) -> Fraction:
    kt = _as_tuple(k)
    vals = kt.values[:-2] + kt.values[-1:] if tilde else kt.values
    return prod((1 - Fraction(omega) / kj for kj in vals), start=Fraction(1))


def gamma_omega_solve(
    k, nu: Fraction, tilde: bool = False, rel_tol: Fraction = Fraction(1, 10**12)
) -> Fraction:
    """Scaling omega in (0, 1] with gamma(k; omega) = 2/3 + nu.

    Returns 1 when gamma(k) already reaches 2/3 + nu. Otherwise bisects on
    the strictly decreasing map omega -> gamma(k; omega) and returns the lower
    endpoint of the final bracket, so gamma(k; omega) >= 2/3 + nu holds exactly.
    """
    target = TWO_THIRDS + Fraction(nu)
    if target >= 1:
        raise InputError("need 2/3 + nu < 1")
    if gamma_omega(k, Fraction(1), tilde) >= target:
        return Fraction(1)
    lo, hi = Fraction(0), Fraction(1)
    while hi - lo > rel_tol * lo or lo == 0:
        mid = (lo + hi) / 2
        if gamma_omega(k, mid, tilde) >= target:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class RouteCheck:
    name: str
    feasible: bool
    value: Fraction
    threshold: Fraction
    detail: str

    def describe(self) -> str:
        rel = "<" if self.value < self.threshold else ">="
        verdict = "feasible" if self.feasible else "not feasible"
        return f"{self.name}: {self.value} {rel} {self.threshold} ({self.detail}) -> {verdict}"


@dataclass(frozen=True)
class Verdict:
    exponents: tuple[int, ...]
    gamma: Fraction
    gamma_tilde: Optional[Fraction]
    routes: tuple[RouteCheck, ...]

    def route(self, name: str) -> RouteCheck:
        for r in self.routes:
            if r.name == name:
                return r
        raise KeyError(name)

    def admits(self, mode: str) -> bool:
        """Whether ``mode`` (one of MODES) has a feasible route."""
        names = {
            "grh": ("grh",),
            "unconditional": ("unconditional-pair", "unconditional-odd"),
            "ramanujan": ("ramanujan-pair", "ramanujan-odd"),
            "ramanujan+grh": ("ramanujan+grh",),
        }[mode]
        return any(self.route(n).feasible for n in names)

    def as_dict(self) -> dict:
        return {
            "exponents": list(self.exponents),
            "gamma": str(self.gamma),
            "gamma_tilde": None if self.gamma_tilde is None else str(self.gamma_tilde),
            "routes": [
                {
                    "route": r.name,
                    "feasible": r.feasible,
                    "value": str(r.value),
                    "threshold": str(r.threshold),
                    "detail": r.detail,
                }
                for r in self.routes
            ],
            "modes": {m: self.admits(m) for m in MODES},
        }


def check_feasibility(k) -> Verdict:
    kt = _as_tuple(k)
    g = gamma(kt)
    gt = gamma_tilde(kt) if kt.t >= 2 else None
    odd = kt.has_odd()
    odd_note = "some exponent odd" if odd else "all exponents even"
    routes = [RouteCheck("grh", g < GRH_THRESHOLD, g, GRH_THRESHOLD, "gamma vs 12/17, GRH")]
    for tag, thr in (("unconditional", UNCONDITIONAL_THRESHOLD), ("ramanujan", RAMANUJAN_THRESHOLD)):
        if gt is None:
            routes.append(RouteCheck(f"{tag}-pair", False, g, thr, "needs t >= 2"))
        else:
            routes.append(RouteCheck(f"{tag}-pair", gt < thr, gt, thr, "gamma_tilde, t >= 2"))
        routes.append(RouteCheck(f"{tag}-odd", g < thr and odd, g, thr, odd_note))
    routes.append(
        RouteCheck("ramanujan+grh", g < RAMANUJAN_THRESHOLD, g, RAMANUJAN_THRESHOLD, "gamma vs 5/6, GRH")
    )
    return Verdict(kt.original(), g, gt, tuple(routes))


def plan_route(k: ExponentTuple, mode: str) -> tuple[ExponentTuple, str]:
    """Working tuple and first-step kind ("top" or "pair") for ``mode``.

    Unconditional flavours prefer relabeling an odd exponent to the end, and
    fall back to the pair construction only when every exponent is even.
    """
    if mode not in MODES:
        raise InputError(f"unknown mode {mode!r}")
    v = check_feasibility(k)
    if not v.admits(mode):
        raise InputError(f"mode {mode} not admitted for exponents {k.original()}")
    if mode in ("grh", "ramanujan+grh"):
        return k, "top"
    tag = "unconditional" if mode == "unconditional" else "ramanujan"
    if v.route(f"{tag}-odd").feasible:
        return k.odd_last(), "top"
    return k, "pair"


def default_c(mode: str, eps: Fraction) -> Fraction:
    """2 + 2*eps under GRH, 12/5 + 2*eps otherwise."""
    base = Fraction(2) if mode in ("grh", "ramanujan+grh") else Fraction(12, 5)
    return base + 2 * Fraction(eps)


def lowering_margin(gamma0: Fraction, c: Fraction, eps: Fraction = Fraction(0)) -> Fraction:
    """LHS - RHS of gamma0*(6/c+1) - 4/c - eps > 21*gamma0 - 14 + eps."""
    gamma0, c, eps = Fraction(gamma0), Fraction(c), Fraction(eps)
    return gamma0 * (6 / c + 1) - 4 / c - eps - (21 * gamma0 - 14 + eps)


def lowering_holds(gamma0: Fraction, c: Fraction, eps: Fraction = Fraction(0)) -> bool:
    return lowering_margin(gamma0, c, eps) > 0


def lowering_threshold(c: Fraction, eps: Fraction = Fraction(0)) -> Fraction:
    """The gamma0 bound (7c - 2 - c*eps) / (10c - 3) implied by the inequality."""
    c, eps = Fraction(c), Fraction(eps)
    return (7 * c - 2 - c * eps) / (10 * c - 3)


def margin_ramanujan(gamma0: Fraction, eps: Fraction = Fraction(0)) -> Fraction:
    """LHS - RHS of gamma0 - eps > 5*gamma0 - 10/3 + eps."""
    gamma0, eps = Fraction(gamma0), Fraction(eps)
    return gamma0 - eps - (5 * gamma0 - Fraction(10, 3) + eps)
