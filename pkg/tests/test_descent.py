import random
from fractions import Fraction
from math import gcd, isqrt

import pytest

from mixedwaring.descent import (
    _cube_root_lift,
    ternary_hypotheses,
    final_tail_values,
    five_adic_height,
    p_window,
    run_descent,
    run_endgame,
    select_base_primes,
)
from mixedwaring.errors import ConstructionError, InputError
from mixedwaring.feasibility import ExponentTuple, plan_route
from mixedwaring.ntheory import is_prime, kth_power_residue, valuation
from mixedwaring.pipeline import RunLog, _descend
from mixedwaring.policy import BoundPolicy

DESK = BoundPolicy()


def descend(n, ks, mode="grh", policy=DESK):
    work, kind = plan_route(ExponentTuple.of(ks), mode)
    return _descend(n, work, kind, policy, RunLog())


def test_select_base_primes():
    k = ExponentTuple.of((6, 6))
    assert select_base_primes(10**15 + 7, ExponentTuple.of((4,)), DESK).primes == ()
    assert select_base_primes(10**15 + 7, k, DESK).primes == (7,)
    # 10^15 + 1 = 7 * 11 * 13 * ...
    assert select_base_primes(10**15 + 1, k, DESK).primes == (17,)
    # 7 divides this n, so the last base prime moves on
    assert select_base_primes(7 * 10**14, k, DESK).primes == (11,)
    base = select_base_primes(10**15 + 7, k, BoundPolicy.paper())
    q = base.primes[0]
    assert q > 6**10 and is_prime(q) and gcd(q, 180) == 1
    assert all(not is_prime(r) or gcd(r, 180) != 1 for r in range(6**10 + 1, q))
    three = select_base_primes(10**15 + 7, ExponentTuple.of((6, 12, 12)), DESK, frozenset({7}))
    assert three.primes == (11, 13) and three.omega(2) == 143 and three.omega(0) == 1


def test_conservation_every_stage():
    rng = random.Random(9)
    runs = 0
    for _ in range(40):
        n = rng.randrange(10**12, 10**18)
        try:
            d = descend(n, (6, 6))
        except ConstructionError:
            continue
        runs += 1
        for j, st in enumerate(d.stages):
            tail = final_tail_values(d.k, d.witnesses[:j])
            assert st.upsilon_value * st.m + sum(y ** d.k.k(i) for i, y in tail.items()) == n
            assert st.upsilon_value * st.m <= n
            if st.r == d.k.t:
                continue  # m_t = n carries no coprimality condition
            assert gcd(st.m, 10 * d.base.omega(st.r)) == 1 and st.m % 3 != 2
            if st.r >= 1:
                assert kth_power_residue(st.m, d.k.k(st.r), d.base.at(st.r))
        lam = d.lam
        r = isqrt(lam)
        assert r * r == lam and lam % 2 == 1 and gcd(lam, 30 * d.m0) == 1
    assert runs >= 30


def test_single_exponent_descent_has_one_step():
    d = run_descent(10**20 + 7, ExponentTuple.of((4,)), "top", DESK)
    assert len(d.witnesses) == 1 and [s.r for s in d.stages] == [1, 0]


def test_three_exponent_descent_at_scale():
    d = descend(10**70 + 11, (6, 12, 12))
    assert [s.r for s in d.stages] == [3, 2, 1, 0]
    d = descend(10**40 + 13, (9, 9, 9), "unconditional")
    assert [w.kind for w in d.witnesses] == ["top", "mid", "mid"]


def test_run_descent_rejects_small_n():
    with pytest.raises(InputError):
        run_descent(10**5, ExponentTuple.of((6, 6)), "top", DESK)


def test_p_window_exact():
    for n in (10**12 + 3, 10**15 + 7, 10**30 + 1):
        for lam in (1, 49, 121):
            lo, hi = p_window(n, lam)
            for p in (lo, lo + 1, hi, hi + 1):
                inside = 6 * (lam * p) ** 3 > n and 3 * (lam * p) ** 3 < n
                assert inside == (lo < p <= hi)


def test_cube_root_lift():
    for h in (1, 2, 3):
        q = 5 ** (2 * h)
        for a in range(1, 200):
            if a % 5:
                B = _cube_root_lift(a, h)
                assert 1 <= B <= q and (B**3 - a) % q == 0


def test_five_adic_height_window():
    c = Fraction(2)
    for n in (10**12, 10**20, 10**40):
        h = five_adic_height(n, 1, c)
        if h >= 0:
            assert 5 ** (c * (2 * h + 1)) < (n / 6) ** (1 / 3)
        assert not 5 ** float(c * (2 * h + 3)) < (n / 6) ** (1 / 3)


def test_endgame_properties():
    rng = random.Random(17)
    runs = 0
    for _ in range(40):
        n = rng.randrange(10**12, 10**16)
        try:
            d = descend(n, (6, 6))
            end = run_endgame(d, DESK, "grh")
        except ConstructionError:
            continue
        runs += 1
        m, lam, p, h = d.m0, d.lam, end.p, end.h
        assert h >= 1
        q = 5 ** (2 * h)
        assert (2 * lam * lam * p**3 - m) % q == 0 and (2 * lam * lam * p**3 - m) % (5 * q) != 0
        assert valuation(m - 2 * lam * lam * p**3, 5) == 2 * h
        assert p % 3 == 1 and m % p and is_prime(p)
        assert 6 * (lam * p) ** 3 > n > 3 * (lam * p) ** 3
        N = end.N
        assert N == m - 2 * lam * lam * p**3 > 0 and N == end.T * end.M**2 and end.M == 5**h
        assert (N - m) % 2 == 0 and (N - (m - 2)) % 3 == 0
        assert gcd(N, 6 * p) == 1
    assert runs >= 30


def test_endgame_h1_at_large_n():
    d = run_descent(10**40 + 3, ExponentTuple.of((3,)), "top", DESK)
    assert d.witnesses[0].h >= 1
    end = run_endgame(d, DESK, "grh")
    assert end.h >= 1 and valuation(end.N, 5) == 2 * end.h


def test_alternate_endgame_prime():
    d = descend(10**15 + 7, (6, 6))
    first = run_endgame(d, DESK, "grh")
    second = run_endgame(d, DESK, "grh", after=first.p)
    assert second.p > first.p


def test_ternary_hypotheses_report():
    rep = ternary_hypotheses(7 * 11 * 13, 5)
    assert rep["i_coprime_6p"] is True
    assert rep["iii_ratio_N_over_p5"] == Fraction(1001, 5**5)
    assert ternary_hypotheses(60, 5)["i_coprime_6p"] is False
    rep = ternary_hypotheses(7 * 25, 7, M=5)
    assert rep["iii_ratio_NM12_over_p21"] == Fraction(175 * 5**12, 7**21)
