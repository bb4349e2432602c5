import random
from math import gcd

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from mixedwaring.errors import FactorizationBudgetError
from mixedwaring.ntheory import (
    CongruenceSystem,
    crt_solve,
    factorize,
    find_prime_in_ap,
    hensel_lift_power,
    iroot,
    is_prime,
    is_squarefree,
    kth_power_residue,
    mod_pow,
    next_prime,
    square_split,
    two_squares,
    two_squares_all,
    valuation,
)

from oracles import crt_by_sweep, hensel_lifts, trial_factor, trial_is_prime, two_squares_pairs


def test_is_prime_small_range_matches_trial_division():
    assert [n for n in range(3000) if is_prime(n)] == [n for n in range(3000) if trial_is_prime(n)]


def test_is_prime_examples():
    assert is_prime(2)
    assert not is_prime(561)
    assert is_prime(10**12 + 39) == trial_is_prime(10**12 + 39)
    assert is_prime(10**12 + 39)


@pytest.mark.parametrize("n", [3215031751, 2152302898747, 3474749660383, 341550071728321, 3825123056546413051])
def test_strong_pseudoprimes_rejected(n):
    assert not is_prime(n)


def test_is_prime_large_agrees_with_sympy():
    rng = random.Random(5)
    for _ in range(300):
        n = rng.randrange(2**60, 2**130) | 1
        assert is_prime(n) == sympy.isprime(n)
    assert is_prime(2**127 - 1)
    assert not is_prime((2**61 - 1) * (2**89 - 1))


def test_next_prime():
    assert next_prime(1) == 2
    assert next_prime(7) == 11
    assert next_prime(10**12) == sympy.nextprime(10**12)


def test_factorize_examples():
    assert factorize(1).as_dict() == {}
    assert factorize(360).as_dict() == {2: 3, 3: 2, 5: 1}
    f = factorize(10**18 + 9)
    assert f.complete and f.value() == 10**18 + 9
    assert f.as_dict() == sympy.factorint(10**18 + 9)


def test_factorize_against_oracles():
    for n in range(2, 2000):
        assert factorize(n).as_dict() == trial_factor(n)
    rng = random.Random(11)
    for _ in range(40):
        n = rng.randrange(10**15, 10**24)
        assert factorize(n).as_dict() == sympy.factorint(n)


def test_factorize_semiprime_of_large_primes():
    p, q = 1000000007, 998244353
    assert factorize(p * q).as_dict() == {q: 1, p: 1}


def test_factorize_budget_reports_partial():
    n = 4 * 1000000007 * 998244353
    with pytest.raises(FactorizationBudgetError) as exc:
        factorize(n, budget=1)
    assert exc.value.partial.as_dict().get(2) == 2
    assert exc.value.partial.cofactor == 1000000007 * 998244353


def test_square_split():
    assert square_split(12) == (3, 2)
    assert square_split(7) == (7, 1)
    assert square_split(2**4 * 3**2 * 5) == (5, 12)
    for n in range(1, 500):
        t, m = square_split(n)
        assert t * m * m == n and is_squarefree(t)


def test_mod_pow():
    assert mod_pow(3, 4, 5) == 1
    assert mod_pow(17, 0, 9) == 1
    assert mod_pow(5, 0, 1) == 0
    assert mod_pow(2, 10**10, 10**9 + 7) == pow(2, 10**10, 10**9 + 7) == 291251492


def test_kth_power_residue_examples():
    assert kth_power_residue(1, 7, 13)
    assert not kth_power_residue(2, 3, 7)
    # k odd and prime = 2 (mod k): every unit is a k-th power
    for k in (3, 5, 7, 9):
        for q in sympy.primerange(3, 200):
            if q % k == 2:
                assert all(kth_power_residue(m, k, q) for m in range(1, 3 * q) if m % q)


def test_hensel_examples():
    assert hensel_lift_power(3, 3, 2, 5, 2) == 3
    assert hensel_lift_power(3, 3, 2, 5, 1) == 3
    y = hensel_lift_power(3, 2, 2, 7, 3)
    assert y == 108
    assert hensel_lifts(3, 2, 2, 7, 3) == {108}


def test_crt_examples():
    assert crt_solve(CongruenceSystem.of((2, 3), (3, 5))) == 8
    assert crt_solve(CongruenceSystem.of((0, 13))) == 13
    pairs = [(1, 2), (0, 3), (2, 5), (4, 7)]
    assert crt_solve(CongruenceSystem.of(*pairs)) == crt_by_sweep(pairs) == 207


def test_crt_rejects_non_coprime():
    with pytest.raises(ValueError):
        crt_solve(CongruenceSystem.of((1, 4), (1, 6)))


@given(st.lists(st.sampled_from([2, 3, 5, 7, 11, 13, 17]), min_size=1, max_size=4, unique=True), st.data())
@settings(max_examples=60, deadline=None)
def test_crt_property(moduli, data):
    pairs = [(data.draw(st.integers(0, q - 1)), q) for q in moduli]
    x = crt_solve(CongruenceSystem.of(*pairs))
    assert x == crt_by_sweep(pairs)


def test_two_squares_examples():
    assert two_squares(25, True) == (4, 3)
    assert two_squares(25) == (5, 0)
    assert two_squares(21) is None
    n = 10**9 + 9
    xy = two_squares(n, True)
    assert xy == max(two_squares_pairs(n, True))


def test_two_squares_all_matches_sweep():
    for n in range(1, 3000):
        got = sorted(two_squares_all(n))
        assert got == sorted(two_squares_pairs(n, False)), n


@given(st.integers(1, 10**12), st.integers(1, 10**12))
@settings(max_examples=80, deadline=None)
def test_two_squares_on_constructed_sums(a, b):
    n = a * a + b * b
    x, y = two_squares(n, True)
    assert x * x + y * y == n and x >= y >= 1 and x >= max(a, b)


def test_iroot_and_valuation():
    for k in range(2, 8):
        for n in list(range(0, 300)) + [10**40 + 1, 3**100]:
            r = iroot(n, k)
            assert r**k <= n < (r + 1) ** k
    assert valuation(5**7 * 3, 5) == 7
    assert valuation(11, 5) == 0


def test_find_prime_in_ap_examples():
    assert find_prime_in_ap(CongruenceSystem.of((1, 3), (2, 5)), 10, 100) == 37
    assert find_prime_in_ap(CongruenceSystem.of((0, 4)), 1, 10**6) is None
    assert find_prime_in_ap(CongruenceSystem.of((1, 3)), 3, 8, avoid=7) is None


def test_find_prime_in_ap_against_scan():
    rng = random.Random(3)
    for _ in range(60):
        mod = rng.choice([4, 15, 125 * 3, 625 * 3, 30])
        r = rng.randrange(1, mod)
        lo = rng.randrange(0, 10**6)
        hi = lo + rng.randrange(1, 20000)
        avoid = rng.choice([1, 7 * 11 * 13])
        expect = next(
            (p for p in range(lo + 1, hi + 1) if p % mod == r and sympy.isprime(p) and sympy.gcd(p, avoid) == 1), None
        )
        got = find_prime_in_ap(CongruenceSystem.of((r, mod)), lo, hi, avoid)
        if gcd(r, mod) != 1:
            assert got is None
        else:
            assert got == expect
