"""Exception hierarchy. Each class carries the CLI exit status it maps to."""

from __future__ import annotations

from typing import Any


class WaringError(Exception):
    exit_code = 1

    def __init__(self, reason: str, stage: Any = None, **details: Any) -> None:
        super().__init__(reason)
        self.reason = reason
        self.stage = stage
        self.details = details

    def as_dict(self) -> dict[str, Any]:
        out = {"error": type(self).__name__, "reason": self.reason}
        if self.stage is not None:
            out["stage"] = self.stage
        out.update({k: str(v) for k, v in self.details.items()})
        return out


class InputError(WaringError, ValueError):
    exit_code = 2


class ConstructionError(WaringError):
    """A constructor could not produce a witness meeting its conditions."""

    exit_code = 3


class WeilFailure(ConstructionError):
    """No Weil-congruence solution at a (too small) base prime."""


class BudgetExhausted(WaringError):
    exit_code = 4


class FactorizationBudgetError(BudgetExhausted):
    def __init__(self, partial: Any) -> None:
        super().__init__("factorization work cap exceeded", partial=partial.factors)
        self.partial = partial


class VerificationFailure(WaringError):
    exit_code = 5
