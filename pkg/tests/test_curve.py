import random

import pytest

from fibcurve.curve import (
    AddFailure,
    CurveOverPrimeRing,
    add,
    curve_from_j,
    higher_twists,
    negate,
    order_bsgs,
    order_exhaustive,
    quadratic_twist,
    scalar_mul,
    smallest_nonresidue,
)
from fibcurve.errors import DomainError, ResourceError


def _random_curve(p, rng):
    while True:
        try:
            return CurveOverPrimeRing(p, rng.randrange(p), rng.randrange(p))
        except DomainError:
            continue


def _all_points(E):
    pts = [None]
    for x in range(E.p):
        for y in range(E.p):
            if E.contains((x, y)):
                pts.append((x, y))
    return pts


def test_curve_from_j_examples():
    assert (curve_from_j(0, 7).a, curve_from_j(0, 7).b) == (0, 1)
    E = curve_from_j(1728 % 101, 101)
    assert (E.a, E.b) == (1, 0)
    E73 = curve_from_j(41, 73)
    assert E73.j_invariant() == 41
    assert E73.b == (-E73.a) % 73


def test_curve_from_j_roundtrip():
    for p in (73, 101, 233):
        for r in (2, 5, 41, 50, 70):
            assert curve_from_j(r % p, p).j_invariant() == r % p


def test_add_identities():
    E = CurveOverPrimeRing(7, 0, 1)
    P = (2, 3)
    assert add(P, None, E) == P
    assert add(None, P, E) == P
    assert add(P, negate(P, E), E) is None
    assert add((3, 0), (3, 0), E) is None  # vertical tangent at 2-torsion


def test_scalar_examples():
    E = CurveOverPrimeRing(7, 0, 1)
    P = (2, 3)
    assert scalar_mul(0, P, E) is None
    assert scalar_mul(12, P, E) is None
    assert scalar_mul(13, P, E) is not None
    assert order_exhaustive(E) == 12


def test_group_axioms_exhaustive_small():
    rng = random.Random(3)
    for p in (11, 13, 17, 19, 23):
        E = _random_curve(p, rng)
        pts = _all_points(E)
        if len(pts) > 40:
            continue
        for P in pts:
            for Q in pts:
                assert add(P, Q, E) == add(Q, P, E)
        for P in pts[:8]:
            for Q in pts[:8]:
                for R in pts[:8]:
                    assert add(add(P, Q, E), R, E) == add(P, add(Q, R, E), E)


def test_lagrange_annihilation():
    rng = random.Random(5)
    for p in (11, 31, 61, 101, 151, 199):
        E = _random_curve(p, rng)
        N = order_exhaustive(E)
        for P in _all_points(E)[:60]:
            assert scalar_mul(N, P, E) is None


def test_twist_examples_and_sum():
    E = CurveOverPrimeRing(7, 0, 1)
    tw = quadratic_twist(E, 3)
    assert (tw.a, tw.b) == (0, 6)
    assert order_exhaustive(E) + order_exhaustive(tw) == 2 * 7 + 2
    E13 = CurveOverPrimeRing(13, 1, 0)
    tw13 = quadratic_twist(E13, 2)
    assert (tw13.a, tw13.b) == (4, 0)
    assert order_exhaustive(E13) + order_exhaustive(tw13) == 2 * 13 + 2
    with pytest.raises(DomainError):
        quadratic_twist(E, 2)  # 2 is a QR mod 7


def test_twist_sum_random():
    rng = random.Random(8)
    for _ in range(60):
        p = rng.choice((101, 211, 307, 1009, 4001, 9973))
        E = _random_curve(p, rng)
        tw = quadratic_twist(E, smallest_nonresidue(p))
        assert order_exhaustive(E) + order_exhaustive(tw) == 2 * p + 2


def test_twist_twice_preserves_j():
    E = CurveOverPrimeRing(13, 3, 5)
    g = smallest_nonresidue(13)
    assert quadratic_twist(quadratic_twist(E, g), g).j_invariant() == E.j_invariant()


def test_higher_twists_examples():
    sextic = higher_twists(CurveOverPrimeRing(7, 0, 1))
    assert sorted(order_exhaustive(c) for c in sextic) == [3, 4, 7, 9, 12, 13]
    quartic = higher_twists(CurveOverPrimeRing(5, 1, 0))
    assert sorted(order_exhaustive(c) for c in quartic) == [2, 4, 8, 10]
    supersingular = higher_twists(CurveOverPrimeRing(5, 0, 1))
    assert len(supersingular) < 6  # p = 2 mod 3: single-class regime flag
    assert {order_exhaustive(c) for c in supersingular} == {6}


def test_order_exhaustive_in_hasse():
    from math import isqrt

    rng = random.Random(13)
    for _ in range(40):
        p = rng.choice((101, 499, 1009))
        E = _random_curve(p, rng)
        N = order_exhaustive(E)
        assert abs(p + 1 - N) <= isqrt(4 * p)


def test_order_bsgs_matches_exhaustive():
    rng = random.Random(21)
    for _ in range(80):
        p = rng.choice((101, 211, 307, 401, 499, 2003, 9973, 10133))
        E = _random_curve(p, rng)
        assert order_bsgs(E) == order_exhaustive(E)


def test_order_bsgs_pipeline_case():
    # the q=13 construction yields an order-233 curve over F_263
    from fibcurve.pipeline import construct

    res = construct(13, seed=1)
    ch = res.certificate["chosen"]
    E = CurveOverPrimeRing(int(ch["p"]), int(ch["curve"]["a"]), int(ch["curve"]["b"]))
    assert order_bsgs(E) == 233 == order_exhaustive(E)


def test_addfailure_exposes_factors_mod_91():
    exposed = set()
    for x0 in range(40):
        E = CurveOverPrimeRing(91, 1, 1)
        try:
            scalar_mul(91, (x0, 1), E)
        except AddFailure as e:
            assert 1 < e.factor < 91
            exposed.add(e.factor)
    assert exposed <= {7, 13} and exposed


def test_no_addfailure_over_prime_fields():
    rng = random.Random(34)
    for _ in range(200):
        p = rng.choice((101, 211, 499))
        E = _random_curve(p, rng)
        P = None
        x = rng.randrange(p)
        while P is None:
            if E.contains((x, E.rhs(x))):
                pass
            from fibcurve.modular import jacobi, sqrt_mod

            v = E.rhs(x)
            if v == 0:
                P = (x, 0)
            elif jacobi(v, p) == 1:
                P = (x, sqrt_mod(v, p))
            else:
                x = (x + 1) % p
        scalar_mul(rng.randrange(1, 10**6), P, E)  # must not raise


def test_order_exhaustive_resource_bound():
    with pytest.raises(ResourceError):
        order_exhaustive(CurveOverPrimeRing(10**7 + 19, 1, 1))
