import sys
from math import gcd

import pytest

from fibcurve.errors import CompositeSignal, DomainError
from fibcurve.fib import (
    FibContext,
    binet_check_mod,
    cassini_sqrt_minus_one,
    fib,
    fib_matrix,
    fib_mod,
    fib_pair_mod,
    legendre_fib,
    pisano_period,
)
from fibcurve.modular import jacobi

sys.set_int_max_str_digits(100000)


def test_fib_base_cases():
    assert fib(0) == 0
    assert fib(1) == 1
    assert fib(10) == 55


def test_fib_large_digit_count():
    assert len(str(fib(81839))) == 17103


def test_fib_matches_matrix_oracle():
    for n in (0, 1, 2, 17, 92, 345, 1000):
        assert fib(n) == fib_matrix(n)


def test_fib_recurrence_window():
    a, b = fib(199), fib(200)
    assert fib(201) == a + b


def test_fib_pair_mod_examples():
    assert fib_pair_mod(10, 1000) == (55, 89)
    assert fib_pair_mod(0, 7) == (0, 1)
    assert fib_pair_mod(7, 3) == (1, 0)
    with pytest.raises(DomainError):
        fib_pair_mod(5, 1)


def test_pisano_examples():
    assert pisano_period(3) == 8
    assert pisano_period(2) == 3
    assert pisano_period(10) == 60


def test_legendre_fib_examples():
    assert legendre_fib(3, FibContext.for_index(7)) == 1
    assert legendre_fib(3, FibContext.for_index(5)) == -1
    assert legendre_fib(11, FibContext.for_index(11)) == 1


def test_cassini_sqrt_examples():
    assert cassini_sqrt_minus_one(FibContext.for_index(7)) == 8
    s = cassini_sqrt_minus_one(FibContext.for_index(11))
    assert s * s % 89 == 88


def test_cassini_identity_blocks_only_on_gcd():
    # the ratio satisfies s^2 = -1 whenever the inverse exists, even for
    # composite f_q; f_19 slips through here and is caught downstream
    s = cassini_sqrt_minus_one(FibContext.for_index(19))
    assert s * s % 4181 == 4180


def test_composite_f19_caught_by_sylow_precompute():
    from fibcurve.modular import find_nonresidue, ts_precompute

    f19 = fib(19)
    with pytest.raises(CompositeSignal):
        ts_precompute(f19, find_nonresidue(f19))


def test_binet_examples():
    assert binet_check_mod(5, 11)
    assert binet_check_mod(0, 11)
    assert binet_check_mod(12, 19)
    with pytest.raises(DomainError):
        binet_check_mod(5, 7)  # (5|7) = -1


def test_doubling_and_cassini_identities():
    # spot-checked here; the full n <= 10^4 sweep runs in acceptance
    for n in (1, 2, 3, 10, 50, 211):
        assert fib(2 * n) == fib(n) * (2 * fib(n + 1) - fib(n))
        assert fib(2 * n + 1) == fib(n) ** 2 + fib(n + 1) ** 2


def test_sum_identity():
    total = 0
    for n in range(1, 200):
        total += fib(2 * n)
        assert total == fib(2 * n + 1) - 1


def test_gcd_identity_sample():
    values = [fib(k) for k in range(140)]
    for n in (12, 35, 90, 139):
        for m in (8, 21, 77, 130):
            assert gcd(values[n], values[m]) == values[gcd(n, m)]


def test_pisano_divides_ell_minus_one():
    for ell in (11, 19, 29, 31, 41, 59, 61, 71, 79, 89, 101, 109, 131, 139, 149):
        assert ell % 10 in (1, 9)
        assert (ell - 1) % pisano_period(ell) == 0


def test_divisibility_lemma_parts():
    from fibcurve.primality import _primes_up_to

    for ell in _primes_up_to(200):
        if ell == 5:
            continue
        eps = jacobi(5 % ell, ell) if ell > 2 else -1
        if ell == 2:
            eps = -1  # f_3 = 2 = 0 mod 2; (5|2) treated by parity below
            assert fib_mod(3, 2) == 0
            continue
        assert fib_mod(ell - eps, ell) == 0
        assert fib_mod(ell, ell) == eps % ell


def test_fq_is_1_mod_4():
    for q in (5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47):
        assert fib(q) % 4 == 1


def test_two_adic_valuation_small():
    for q in (5, 7, 11, 13, 17, 23, 29, 43, 47):
        ctx = FibContext.for_index(q)
        assert ctx.e <= 6
        assert (2**ctx.e) * ctx.m == ctx.f_q - 1
        assert ctx.m % 2 == 1


def test_legendre_fib_agrees_with_direct_jacobi():
    from fibcurve.primality import _primes_up_to

    for q in (7, 11, 13, 17, 23, 29):
        ctx = FibContext.for_index(q)
        f_q = ctx.f_q
        for ell in _primes_up_to(199):
            if ell == 2 or f_q == ell:
                continue
            direct = jacobi(f_q % ell, ell) if f_q % ell else 0
            assert legendre_fib(ell, ctx) == direct, (q, ell)


def test_context_rejects_bad_indices():
    for bad in (3, 4, 9, 15):
        with pytest.raises(DomainError):
            FibContext.for_index(bad)
