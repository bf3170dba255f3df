import random

import pytest

from fibcurve import polyring as pr
from fibcurve.curve import CurveOverPrimeRing, order_exhaustive, scalar_mul
from fibcurve.errors import DomainError, VerificationFailure
from fibcurve.modular import jacobi, sqrt_mod
from fibcurve.schoof import (
    Candidate,
    accepted_eigenvalues,
    char_poly_roots,
    division_poly,
    eigenvalue_verification_pass,
    eigenvalue_verify,
    elkies_verification_pass,
    is_elkies,
    kernel_poly,
    schoof_trace,
    schoof_trace_mod,
    trace_parity,
)


def _random_curve(p, rng):
    while True:
        try:
            return CurveOverPrimeRing(p, rng.randrange(p), rng.randrange(p))
        except DomainError:
            continue


def test_division_poly_example():
    dp = division_poly(CurveOverPrimeRing(5, 1, 0), 3)
    assert list(dp.poly) == [4, 0, 1, 0, 3]  # 3x^4 + 6x^2 - 1 mod 5


def test_division_poly_degree():
    for ell in (3, 5, 7, 11, 13):
        dp = division_poly(CurveOverPrimeRing(101, 3, 8), ell)
        assert len(dp.poly) - 1 == (ell * ell - 1) // 2


def test_division_poly_roots_are_torsion_x():
    E = CurveOverPrimeRing(7, 0, 1)
    psi3 = list(division_poly(E, 3).poly)
    for x0 in pr.roots(psi3, 7):
        v = E.rhs(x0)
        if v == 0 or jacobi(v, 7) == 1:
            y0 = 0 if v == 0 else sqrt_mod(v, 7)
            assert scalar_mul(3, (x0, y0), E) is None


def test_schoof_trace_mod_examples():
    assert schoof_trace_mod(CurveOverPrimeRing(5, 1, 0), 3).t_mod == 2
    assert schoof_trace_mod(CurveOverPrimeRing(7, 0, 1), 3).t_mod == 2  # -4 mod 3
    assert schoof_trace_mod(CurveOverPrimeRing(7, 0, 1), 5).t_mod == 1  # -4 mod 5


def test_schoof_trace_examples():
    assert schoof_trace(CurveOverPrimeRing(5, 1, 0)) == 2
    assert schoof_trace(CurveOverPrimeRing(7, 0, 1)) == -4


def test_trace_parity():
    # X^3 + X has the 2-torsion point (0,0): even order, even trace
    assert trace_parity(CurveOverPrimeRing(5, 1, 0)) == 0
    assert trace_parity(CurveOverPrimeRing(7, 0, 1)) == 0  # (3,0) on it


def test_schoof_random_batch():
    rng = random.Random(17)
    for _ in range(50):
        p = rng.choice((101, 211, 307, 401, 499))
        E = _random_curve(p, rng)
        assert schoof_trace(E) == p + 1 - order_exhaustive(E)


def test_is_elkies_examples():
    E = CurveOverPrimeRing(7, 0, 1)  # t = -4, D_pi = -12
    assert is_elkies(E, 5) is False  # (-12 mod 5 | 5) = (3|5) = -1
    assert is_elkies(E, 3) is True  # ramified counts as Elkies
    with pytest.raises(DomainError):
        is_elkies(CurveOverPrimeRing(13, 2, 5), 11)  # no table for 11


def test_is_elkies_computes_at_special_j():
    # the gcd is well-defined at j = 0 even though the Elkies/Atkin
    # equivalence needs ordinary automorphisms; Phi_2(X, 0) = (X-54000)^3
    E = CurveOverPrimeRing(13, 0, 2)
    assert E.j_invariant() == 0
    assert isinstance(is_elkies(E, 2), bool)


def test_elkies_matches_jacobi_predicate():
    rng = random.Random(23)
    checked = 0
    for p in (101, 211, 307, 401, 499):
        for _ in range(8):
            E = _random_curve(p, rng)
            if E.j_invariant() in (0, 1728 % p):
                continue
            t = p + 1 - order_exhaustive(E)
            for ell in (3, 5, 7):
                d = (t * t - 4 * p) % ell
                pred = d == 0 or jacobi(d, ell) == 1
                assert is_elkies(E, ell) == pred
                checked += 1
    assert checked > 60


def test_kernel_poly_examples():
    E7 = CurveOverPrimeRing(7, 0, 1)
    k = kernel_poly(E7, 13)
    assert len(k.poly) - 1 == 6
    psi = list(division_poly(E7, 13).poly)
    assert not pr.pdivmod(psi, list(k.poly), 7)[1]  # divides psi exactly

    k5 = kernel_poly(CurveOverPrimeRing(5, 1, 0), 13)
    assert len(k5.poly) - 1 == 6

    with pytest.raises(VerificationFailure):
        kernel_poly(E7, 5)  # non-Elkies prime


def test_eigenvalue_examples():
    E7 = CurveOverPrimeRing(7, 0, 1)
    roots = char_poly_roots(-4, 7, 13)
    # lambda + mu = -4 = 9 and lambda * mu = 7 (mod 13): the pair {4, 5}
    assert roots is not None and set(roots) == {4, 5}
    assert (roots[0] * roots[1] - 7) % 13 == 0
    assert (roots[0] + roots[1] + 4) % 13 == 0
    assert eigenvalue_verify(E7, 13, -4) is True
    assert eigenvalue_verify(E7, 13, 1) is False  # wrong trace, split char poly
    with pytest.raises(VerificationFailure):
        eigenvalue_verify(E7, 13, 2)  # t=2: X^2-2X+7 irreducible mod 13


def test_eigenvalue_exhaustive_over_residues():
    rng = random.Random(31)
    verified = 0
    for p in (211, 307, 401):
        for _ in range(6):
            E = _random_curve(p, rng)
            if E.j_invariant() in (0, 1728 % p):
                continue
            t = p + 1 - order_exhaustive(E)
            for ell in (3, 5, 7):
                d = (t * t - 4 * p) % ell
                if d != 0 and jacobi(d, ell) != 1:
                    continue
                acc = set(accepted_eigenvalues(E, ell))
                assert acc == set(char_poly_roots(t, p, ell)), (p, ell)
                for lam in range(ell):
                    assert (lam in acc) == (lam in char_poly_roots(t, p, ell))
                verified += 1
    assert verified > 20


def test_ramified_single_eigenvalue():
    # E/F_7 with t = -4: ell = 3 divides t^2 - 4p = -12: double root
    E = CurveOverPrimeRing(7, 0, 1)
    roots = char_poly_roots(-4, 7, 3)
    assert roots == (1, 1)
    assert eigenvalue_verify(E, 3, -4) is True


def _pipeline_candidate(q, seed=1):
    from fibcurve.pipeline import construct

    res = construct(q, seed=seed)
    ch = res.certificate["chosen"]
    p = int(ch["p"])
    E = CurveOverPrimeRing(p, int(ch["curve"]["a"]), int(ch["curve"]["b"]))
    return Candidate(E=E, p=p, D=int(ch["D"]), trace=int(ch["trace"]))


def test_verification_passes_keep_valid_candidate():
    cand = _pipeline_candidate(11)
    survivors, log = elkies_verification_pass([cand])
    assert survivors == [cand]
    survivors, log2 = eigenvalue_verification_pass(survivors)
    assert survivors == [cand]
    assert cand.witnesses


def test_verification_passes_remove_corrupted_candidate():
    cand = _pipeline_candidate(11)
    # corrupt the curve: replace with a curve of a different j-invariant
    bad_curve = CurveOverPrimeRing(cand.p, (cand.E.a + 1) % cand.p, cand.E.b)
    bad = Candidate(E=bad_curve, p=cand.p, D=cand.D, trace=cand.trace)
    survivors, _ = elkies_verification_pass([bad])
    if survivors:  # a lucky j may pass the root filter; the trace check won't
        survivors, _ = eigenvalue_verification_pass(survivors)
    assert survivors == []


def test_verification_passes_empty_input():
    assert elkies_verification_pass([])[0] == []
    assert eigenvalue_verification_pass([])[0] == []


def test_wrong_trace_candidate_removed():
    cand = _pipeline_candidate(13)
    bad = Candidate(E=cand.E, p=cand.p, D=cand.D, trace=cand.trace + 2)
    survivors, _ = elkies_verification_pass([bad])
    survivors, _ = eigenvalue_verification_pass(survivors)
    assert survivors == []
