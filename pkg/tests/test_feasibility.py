import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixedwaring.errors import InputError
from mixedwaring.feasibility import (
    GRH_THRESHOLD,
    RAMANUJAN_THRESHOLD,
    UNCONDITIONAL_THRESHOLD,
    ExponentTuple,
    check_feasibility,
    default_c,
    gamma,
    gamma_omega,
    gamma_omega_solve,
    gamma_tilde,
    lowering_holds,
    lowering_margin,
    margin_ramanujan,
    plan_route,
    lowering_threshold,
)


def test_gamma_values():
    assert gamma((6, 6)) == Fraction(25, 36)
    assert gamma((5, 8)) == Fraction(4, 5) * Fraction(7, 8) == Fraction(7, 10)
    assert gamma((9, 9, 9)) == Fraction(8, 9) ** 3 == Fraction(512, 729)
    assert gamma((6, 12, 12)) == Fraction(5, 6) * Fraction(11, 12) ** 2 == Fraction(605, 864)
    assert gamma((4,)) == Fraction(3, 4)


def test_gamma_tilde_values():
    assert gamma_tilde((6, 6)) == Fraction(5, 6)
    assert gamma_tilde((9, 9, 9)) == Fraction(64, 81)
    with pytest.raises(InputError):
        gamma_tilde((4,))


@given(st.lists(st.integers(2, 40), min_size=2, max_size=6))
@settings(max_examples=100, deadline=None)
def test_gamma_tilde_dominates_gamma(ks):
    assert gamma_tilde(ks) >= gamma(ks)


def test_exponent_tuple_validation_and_relabel():
    with pytest.raises(InputError):
        ExponentTuple.of([1, 5])
    with pytest.raises(InputError):
        ExponentTuple.parse("6,x")
    k = ExponentTuple.of([8, 5])
    assert k.values == (5, 8) and k.original() == (8, 5)
    r = k.odd_last()
    assert r.values == (8, 5) and r.relabeled
    assert r.original() == (8, 5)
    assert r.to_original(["y8", "y5"]) == ["y8", "y5"]
    k3 = ExponentTuple.of([9, 4, 6])
    assert k3.K == 4 * 6
    assert k3.odd_last().values == (4, 6, 9)
    with pytest.raises(InputError):
        ExponentTuple.of([6, 6]).odd_last()


def test_gamma_omega_solve():
    assert gamma_omega_solve((6, 6), Fraction(1, 100)) == 1
    w = gamma_omega_solve((3, 3), Fraction(0))
    closed = 3 * (1 - math.sqrt(2 / 3))
    assert abs(float(w) - closed) < 1e-9
    assert gamma_omega((3, 3), w) >= Fraction(2, 3)
    prev = Fraction(2)
    for nu in [Fraction(i, 200) for i in range(0, 40, 3)]:
        w = gamma_omega_solve((3, 3), nu)
        assert w <= prev
        prev = w


def test_check_feasibility_routes():
    v = check_feasibility((6, 6))
    assert v.admits("grh") and not v.admits("unconditional") and not v.admits("ramanujan")
    assert v.route("unconditional-pair").value == Fraction(5, 6)
    v = check_feasibility((5, 8))
    assert v.admits("unconditional") and v.route("unconditional-odd").feasible
    v = check_feasibility((4,))
    assert [m for m in ("grh", "unconditional", "ramanujan", "ramanujan+grh") if v.admits(m)] == ["ramanujan+grh"]
    assert gamma((4,)) >= GRH_THRESHOLD
    v = check_feasibility((9, 9, 9))
    assert v.admits("unconditional") and v.gamma < UNCONDITIONAL_THRESHOLD
    v = check_feasibility((6, 12, 12))
    assert v.admits("grh") and v.gamma < GRH_THRESHOLD


def test_plan_route():
    assert plan_route(ExponentTuple.of((6, 6)), "grh") == (ExponentTuple.of((6, 6)), "top")
    work, kind = plan_route(ExponentTuple.of((5, 8)), "unconditional")
    assert kind == "top" and work.values == (8, 5)
    work, kind = plan_route(ExponentTuple.of((4, 4, 4)), "unconditional")
    assert kind == "pair" and work.values == (4, 4, 4)
    with pytest.raises(InputError):
        plan_route(ExponentTuple.of((6, 6)), "unconditional")


def test_inequality_threshold_closed_form():
    assert lowering_threshold(2) == GRH_THRESHOLD
    assert lowering_threshold(Fraction(12, 5)) == UNCONDITIONAL_THRESHOLD
    d = Fraction(1, 1000)
    assert lowering_holds(GRH_THRESHOLD - d, 2) and not lowering_holds(GRH_THRESHOLD + d, 2)
    assert lowering_margin(GRH_THRESHOLD, 2) == 0
    assert margin_ramanujan(RAMANUJAN_THRESHOLD) == 0
    assert margin_ramanujan(RAMANUJAN_THRESHOLD - d) > 0


def test_default_c():
    eps = Fraction(1, 1000)
    assert default_c("grh", eps) == 2 + 2 * eps
    assert default_c("unconditional", eps) == Fraction(12, 5) + 2 * eps
