"""End-to-end representation: descent, endgame, ternary solve, reassembly."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .certificate import RepresentationCertificate, reassemble, verify_certificate
from .descent import Descent, run_descent, run_endgame, select_base_primes
from .errors import BudgetExhausted, ConstructionError, VerificationFailure, WeilFailure
from .feasibility import ExponentTuple, plan_route
from .policy import BoundPolicy
from .ternary import EXHAUSTED, FOUND, solve_ternary

log = logging.getLogger(__name__)


@dataclass
class RunLog:
    """Human-readable trace of one representation run."""

    lines: list[str] = field(default_factory=list)

    def __call__(self, msg: str) -> None:
        log.debug(msg)
        self.lines.append(msg)


def _descend(n: int, k: ExponentTuple, kind: str, policy: BoundPolicy, trace: RunLog) -> Descent:
    """Run the descent, excluding base primes that defeat a step and retrying."""
    exclude: set[int] = set()
    failures: list[str] = []
    for attempt in range(policy.retries + 1):
        base = select_base_primes(n, k, policy, frozenset(exclude))
        trace(f"attempt {attempt}: base primes {list(base.primes)}")
        try:
            return run_descent(n, k, kind, policy, base)
        except ConstructionError as exc:
            if isinstance(exc, WeilFailure):
                bad = int(exc.details["prime"])
            elif not base.primes:
                raise
            else:
                # a different base prime set changes every CRT shift downstream
                bad = base.primes[-1] if exc.stage is None else base.at(max(1, min(int(exc.stage), len(base))))
            where = "" if exc.stage is None else f" at stage {exc.stage}"
            failures.append(exc.reason + where)
            trace(f"  failed: {exc.reason}{where}; excluding base prime {bad}")
            exclude.add(bad)
    raise ConstructionError("descent retries exhausted", attempts="; ".join(failures))


def represent(
    n: int,
    exponents: Sequence[int] | ExponentTuple,
    mode: str = "grh",
    policy: Optional[BoundPolicy] = None,
    seed: int = 0,
    trace: Optional[RunLog] = None,
) -> RepresentationCertificate:
    """Find and verify n = x1^2 + x2^2 + x3^3 + x4^3 + sum y_j^k_j.

    Raises InputError, ConstructionError, BudgetExhausted or VerificationFailure.
    """
    policy = policy or BoundPolicy()
    trace = trace if trace is not None else RunLog()
    k = exponents if isinstance(exponents, ExponentTuple) else ExponentTuple.of(exponents)
    work, kind = plan_route(k, mode)
    trace(f"route {kind} on working exponents {list(work.values)}")
    d = _descend(n, work, kind, policy, trace)
    for w in d.witnesses:
        trace(f"stage {w.stage} -> {w.next_stage}: prime {w.prime}, h = {w.h}, y = {list(w.ys)}")
    trace(f"lambda = {d.lam}, m_0 = {d.m0}")

    after = 0
    exhausted = False
    for _ in range(policy.retries + 1):
        end = run_endgame(d, policy, mode, after=after)
        trace(f"endgame: h = {end.h}, p = {end.p}, N = {end.N}")
        res = solve_ternary(
            end.N, end.p, positive=True, budget_z=policy.budget_z, rho_per_value=policy.rho_per_value, seed=seed
        )
        trace(f"ternary: {res.status} after {res.tried} values of z ({res.skipped} skipped)")
        if res.status == FOUND:
            try:
                cert = reassemble(d, end, res.solution, mode, policy, seed)
            except ConstructionError as exc:
                trace(f"reassembly rejected the ternary solution: {exc.reason}")
            else:
                report = verify_certificate(cert)
                if not report.ok:
                    name, detail = report.first_failure
                    raise VerificationFailure("certificate failed verification", check=name, detail=detail)
                return cert
        exhausted = exhausted or res.status == EXHAUSTED
        after = end.p
    if exhausted:
        raise BudgetExhausted("ternary search budget exhausted for every endgame prime", stage=0)
    raise ConstructionError("no endgame prime gave a positive ternary solution", stage=0)
