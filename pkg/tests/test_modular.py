from math import gcd

import pytest

from fibcurve.errors import CompositeSignal, DomainError, NotASquare
from fibcurve.modular import (
    cornacchia,
    find_nonresidue,
    jacobi,
    sqrt_mod,
    sqrt_mod_3mod4,
    sqrt_mod_5mod8,
    ts_precompute,
    ts_sqrt,
)


def test_jacobi_examples():
    assert jacobi(2, 7) == 1
    assert jacobi(1, 9) == 1
    assert jacobi(22, 67) == 1
    with pytest.raises(DomainError):
        jacobi(3, 8)


def test_sqrt_3mod4_examples():
    assert sqrt_mod_3mod4(2, 7) == 3
    assert sqrt_mod_3mod4(1, 11) == 1
    assert sqrt_mod_3mod4(4, 19) == 2
    with pytest.raises(NotASquare):
        sqrt_mod_3mod4(3, 7)


def test_sqrt_5mod8_examples():
    assert sqrt_mod_5mod8(3, 13) == 4
    assert sqrt_mod_5mod8(12, 13) == 5
    assert sqrt_mod_5mod8(1, 5) == 1


def test_ts_table_p17():
    table = ts_precompute(17, 3)
    assert (table.g, table.e, table.m) == (3, 4, 1)
    assert len(table.entries) == 8  # even powers of the 16-element group
    for value, root in table.entries:
        assert root * root % 17 == value
    assert ts_sqrt(13, table) == 8
    assert ts_sqrt(1, table) == 1


def test_ts_table_p13_p89():
    t13 = ts_precompute(13, 2)
    assert (t13.g, t13.e, t13.m) == (8, 2, 3)
    assert pow(8, 2, 13) == 12  # g^(2^(e-1)) = -1
    t89 = ts_precompute(89, 3)
    assert (t89.e, t89.m, t89.g) == (3, 11, pow(3, 11, 89))
    assert ts_sqrt(88, t89) == 34


def test_ts_rejects_residue_seed():
    with pytest.raises(DomainError):
        ts_precompute(17, 2)  # 2 is a QR mod 17


def test_sqrt_mod_dispatch_examples():
    assert sqrt_mod(2, 7) == 3
    assert sqrt_mod(3, 13) == 4
    assert sqrt_mod(13, 17, ts_precompute(17, 3)) == 8


def test_sqrt_mod_canonical_and_correct_small_sweep():
    from fibcurve.primality import _primes_up_to

    for p in _primes_up_to(300):
        if p < 3:
            continue
        least = {}
        for x in range(1, p):
            least.setdefault(x * x % p, min(x, p - x))
        table = ts_precompute(p, find_nonresidue(p)) if p % 8 == 1 else None
        for a, expect in least.items():
            got = sqrt_mod(a, p, table)
            assert got == expect, (p, a)


def test_ts_sqrt_never_succeeds_on_nonresidue():
    for p in (17, 41, 73, 89, 97):
        table = ts_precompute(p, find_nonresidue(p))
        for a in range(2, p):
            if jacobi(a, p) == -1:
                with pytest.raises((CompositeSignal, NotASquare)):
                    ts_sqrt(a, table)
                    raise NotASquare("lookup unexpectedly succeeded")


def test_cornacchia_examples():
    assert cornacchia(1, 13) == (3, 2)
    assert cornacchia(67, 356) == (17, 1)
    assert not cornacchia(1, 21)


def test_cornacchia_pipeline_witnesses():
    assert cornacchia(11, 356) == (9, 5)
    assert cornacchia(187, 356) == (13, 1)


def test_cornacchia_root_canonicalization():
    # descent roots are canonicalized below m/2
    from fibcurve.modular import _sqrt_classes_mod

    for d, m in ((3, 52), (1, 13), (4, 20)):
        for r in _sqrt_classes_mod(d, m):
            assert r <= m // 2
            assert r * r % m == (-d) % m


def test_cornacchia_brute_force_sample():
    # the full d <= 50, m <= 5000 sweep runs in acceptance
    sols = {}
    M = 600
    for d in range(1, 13):
        y = 1
        while d * y * y < M:
            x = 1
            while x * x + d * y * y <= M:
                if gcd(x, y) == 1:
                    sols.setdefault((d, x * x + d * y * y), []).append((x, y))
                x += 1
            y += 1
    for d in range(1, 13):
        for m in range(d + 1, M + 1):
            got = cornacchia(d, m)
            expected = sols.get((d, m), [])
            if expected:
                assert got and tuple(got) in expected, (d, m, got, expected)
            else:
                assert not got, (d, m, got)


def test_cornacchia_domain():
    with pytest.raises(DomainError):
        cornacchia(5, 5)
    with pytest.raises(DomainError):
        cornacchia(0, 10)
