"""Bound policies: how the asymptotic size windows are realised at finite n."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from typing import Optional

from .errors import InputError

DESK = "desk-scale"
PAPER = "paper-faithful"


@dataclass(frozen=True)
class BoundPolicy:
    """Window and budget parameters for one descent run.

    ``desk-scale`` replaces every power-of-log factor by the single slack
    exponent ``slack``; ``paper-faithful`` keeps the log factors and the
    K**10 floor on base primes, and never accepts a zero height.
    """

    mode: str = DESK
    eps: Fraction = Fraction(1, 1000)
    c: Optional[Fraction] = None
    omega: Optional[Fraction] = None
    nu: Fraction = Fraction(1, 100)
    slack: Fraction = Fraction(1, 2)
    base_floor: int = 5
    residue_cap: int = 10**6
    allow_zero_height: bool = True
    min_n: int = 10**10
    retries: int = 8
    budget_z: int = 10**6
    rho_per_value: int = 20_000
    count_cap: int = 10**8

    def __post_init__(self) -> None:
        if self.mode not in (DESK, PAPER):
            raise InputError(f"unknown policy mode {self.mode!r}")
        for name in ("eps", "nu", "slack"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.c is not None:
            object.__setattr__(self, "c", Fraction(self.c))
        if self.omega is not None:
            object.__setattr__(self, "omega", Fraction(self.omega))
            if not 0 < self.omega <= 1:
                raise InputError("omega must lie in (0, 1]")
        if not 0 < self.slack <= 1:
            raise InputError("slack must lie in (0, 1]")
        if self.eps <= 0:
            raise InputError("eps must be positive")
        if self.retries < 0 or self.budget_z < 1 or self.rho_per_value < 1 or self.count_cap < 1:
            raise InputError("budgets must be positive")

    @classmethod
    def paper(cls, **kw) -> "BoundPolicy":
        kw.setdefault("allow_zero_height", False)
        return cls(mode=PAPER, **kw)

    @property
    def desk(self) -> bool:
        return self.mode == DESK

    def with_(self, **kw) -> "BoundPolicy":
        return replace(self, **kw)

    def as_dict(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            out[k] = None if v is None else (str(v) if isinstance(v, (Fraction, int)) and not isinstance(v, bool) else v)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "BoundPolicy":
        kw = {}
        for k, v in d.items():
            if v is None or isinstance(v, bool):
                kw[k] = v
            elif k in ("eps", "c", "omega", "nu", "slack"):
                kw[k] = Fraction(v)
            elif k == "mode":
                kw[k] = v
            else:
                kw[k] = int(v)
        return cls(**kw)

    # --- step windows -----------------------------------------------------

    def height_cap_log(self, m: int, k: int, omega: Fraction, log_power: int) -> float:
        """log of the largest allowed prime power prime**l at a step.

        desk-scale: (m**(omega/k))**slack.  paper-faithful: m**(omega/k) * (log m)**(-log_power).
        """
        lm = math.log(m)
        if self.desk:
            return float(self.slack) * float(omega) * lm / k
        return float(omega) * lm / k - log_power * math.log(lm)

    def y_upper_ok(self, y: int, m: int, k: int, omega: Fraction, t: int, u: int) -> bool:
        """Upper half of the size condition on a step's y.

        desk: 4t * y**k <= m**omega, which keeps the tail sum below n/4.
        paper-faithful: y <= m**(omega/k) * (log m)**(-u).
        """
        if self.desk:
            if omega == 1:
                return 4 * t * y**k <= m
            return k * math.log(y) + math.log(4 * t) <= float(omega) * math.log(m) * (1 + 1e-15)
        lm = math.log(m)
        return math.log(y) <= float(omega) * lm / k - u * math.log(lm) + 1e-12

    def power_lower_ok(self, prime_power_log: float, m: int, k: int, omega: Fraction, u: int, K: int, t: int) -> bool:
        """Lower half: prime**l >= m**(omega/k) * (log m)**(-20 u K), paper-faithful only."""
        if self.desk:
            return True
        lm = math.log(m)
        return prime_power_log >= float(omega) * lm / k - 20 * u * K * math.log(lm) - 1e-12
