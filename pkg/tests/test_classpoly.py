import mpmath
import pytest

from fibcurve.classpoly import (
    build_crt_plan,
    ell_t_curve_sample,
    hilbert_analytic,
    hilbert_crt,
    hilbert_crt_integer,
    j_from_tau,
    kronecker_at,
    root_mod,
    rounding_residues,
    volcano_surface_walk,
)
from fibcurve.curve import curve_from_j, order_exhaustive
from fibcurve.errors import DomainError, VerificationFailure
from fibcurve.forms import class_number, is_fundamental
from fibcurve.modpoly import available_levels, load_table

GROUND_TRUTH = {
    -7: 3375,
    -11: 32768,
    -19: 884736,
    -43: 884736000,
    -67: 147197952000,
    -163: 262537412640768000,
}


def test_j_special_values():
    with mpmath.workdps(50):
        assert abs(j_from_tau(mpmath.mpc(0, 1), 30) - 1728) < 1e-20
        rho = mpmath.mpc(0.5, mpmath.sqrt(3) / 2)
        assert abs(j_from_tau(rho, 30)) < 1e-20
        tau7 = mpmath.mpc(0.5, mpmath.sqrt(7) / 2)
        assert abs(j_from_tau(tau7, 30) + 3375) < 1e-20


def test_j_rejects_low_imaginary_part():
    with pytest.raises(DomainError):
        j_from_tau(mpmath.mpc(0, 0.3), 20)


def test_hilbert_class_number_one_values():
    for D, const in GROUND_TRUTH.items():
        H = hilbert_analytic(D, precision=60)
        assert H.degree == 1
        assert H.coeffs == (const, 1)


def test_hilbert_h2_and_specials():
    assert hilbert_analytic(-15).coeffs == (-121287375, 191025, 1)
    assert hilbert_analytic(-4).coeffs == (-1728, 1)
    assert hilbert_analytic(-3).coeffs == (0, 1)


def test_hilbert_degree_equals_class_number():
    for D in (-23, -47, -71, -84, -120, -195):
        assert hilbert_analytic(D).degree == class_number(D)


def test_rounding_residues_are_tiny():
    for D in (-23, -71, -120, -191, -196):
        assert rounding_residues(D) < 1e-3


def test_crt_plan_examples():
    plan = build_crt_plan(-7)
    assert plan.primes[0] == (11, 4, 2)
    assert plan.primes[1][0] == 23
    prod = 1
    for eta, t, v in plan.primes:
        assert 4 * eta == t * t + v * v * 7
        prod *= eta
    assert prod > 2 * plan.coeff_bound

    plan67 = build_crt_plan(-67)
    assert plan67.primes[0] == (17, 1, 1)
    assert all(v == 1 for _, _, v in plan67.primes)


def test_ell_t_curve_sample_examples():
    j11 = ell_t_curve_sample(11, 4)
    E = curve_from_j(j11, 11)
    assert order_exhaustive(E) in (8, 16)  # trace +-4
    j13 = ell_t_curve_sample(13, 2)
    E13 = curve_from_j(j13, 13)
    assert order_exhaustive(E13) in (12, 16)
    assert j11 not in (0, 1728 % 11)


def test_volcano_walk_matches_analytic_roots():
    tables = {ell: load_table(ell) for ell in available_levels()}
    for D, eta_seed in ((-15, None), (-23, None)):
        plan = build_crt_plan(D)
        eta, t, v = plan.primes[0]
        from fibcurve.classpoly import ascend_to_surface

        j0 = ell_t_curve_sample(eta, t)
        if v % 2 == 0:
            j0 = ascend_to_surface(j0, eta, tables)
        orbit = volcano_surface_walk(j0, D, eta, v=v, tables=tables)
        assert len(orbit) == class_number(D)
        H = hilbert_analytic(D)
        from fibcurve import polyring as pr

        assert sorted(pr.roots(H.as_list(eta), eta)) == sorted(orbit)


def test_volcano_walk_singleton_for_h1():
    tables = {ell: load_table(ell) for ell in available_levels()}
    plan = build_crt_plan(-7)
    eta, t, v = plan.primes[0]
    from fibcurve.classpoly import ascend_to_surface

    j0 = ascend_to_surface(ell_t_curve_sample(eta, t), eta, tables)
    assert volcano_surface_walk(j0, -7, eta, v=v, tables=tables) == {j0}


def test_hilbert_crt_examples():
    assert hilbert_crt(-7, 73).coeffs == (3375 % 73, 1)
    assert hilbert_crt(-67, 73).coeffs == (147197952000 % 73, 1)
    analytic = hilbert_analytic(-15).reduce_mod(101)
    assert hilbert_crt(-15, 101).coeffs == analytic.coeffs


def test_crt_matches_analytic_wider():
    for D in (-3, -4, -20, -35, -51, -91, -115, -187, -195):
        assert hilbert_crt_integer(D).coeffs == hilbert_analytic(D).coeffs


def test_root_mod_examples():
    H67 = hilbert_analytic(-67)
    hit = root_mod(H67, 73)
    # 147197952000 = 5280^3 = 27 (mod 73), so the root is -27 = 46
    assert hit.value == 46 and not hit.special
    # 3375 = 0 (mod 3): the only root of H_-7 mod 3 is the degenerate
    # j = 0, flagged special (the norm equation 12 = x^2 + 7y^2 fails)
    hit7 = root_mod(hilbert_analytic(-7), 3)
    assert hit7.value == 0 and hit7.special
    hit15 = root_mod(hilbert_analytic(-15), 61)
    coeffs = hilbert_analytic(-15).as_list(61)
    from fibcurve import polyring as pr

    assert hit15.value in pr.roots(coeffs, 61)
    assert hit15.value == min(pr.roots(coeffs, 61))


def test_root_existence_matches_splitting():
    # for (D|p) = 1 the polynomial either has no root or splits into
    # linear factors entirely; inert p can carry stray roots, which is
    # why the pipeline only ever reduces at split primes
    from fibcurve import polyring as pr
    from fibcurve.modular import jacobi
    from fibcurve.primality import _primes_up_to

    for D in (-23, -31, -59):
        H = hilbert_analytic(D)
        h = H.degree
        for p in _primes_up_to(200):
            if p < 5 or D % p == 0 or jacobi(D % p, p) != 1:
                continue
            factors = pr.factor(H.as_list(p), p)
            degrees = [pr.deg(g) for g in factors]
            if any(d == 1 for d in degrees):
                assert all(d == 1 for d in degrees) and len(degrees) == h, (D, p)


def test_cube_root_property_sample():
    from fibcurve.classpoly import _integer_cube_root

    for D in range(-200, -2):
        if D % 4 in (0, 1) and is_fundamental(D):
            H = hilbert_analytic(D)
            assert _integer_cube_root(H.coeffs[0]) is not None, D


def test_kronecker_at():
    assert kronecker_at(-67, 2) == -1  # -67 = 5 (mod 8)
    assert kronecker_at(-7, 2) == 1
    assert kronecker_at(-4, 2) == 0
    assert kronecker_at(-67, 3) == -1
    assert kronecker_at(-187, 7) == 1


def test_modpoly_tables_validate():
    for level in (2, 3, 5, 7):
        table = load_table(level)
        assert table.degree() == level + 1
        assert table.coeff(level + 1, 0) == 1
        assert table.validate(30)
        # symmetry of the stored map
        for (i, j), c in table.coeffs.items():
            assert table.coeff(j, i) == c


def test_modpoly_phi2_spot_values():
    t = load_table(2)
    # classical values, re-derived through the expansion identity
    assert t.coeff(3, 0) == 1
    assert t.coeff(2, 2) == -1
    assert t.coeff(2, 0) == -162000
    assert t.coeff(1, 1) == 40773375
    assert t.coeff(2, 1) == 1488


def test_modpoly_corrupted_table_detected():
    from fibcurve.modpoly import ModularPolynomialTable

    t = load_table(2)
    bad = dict(t.coeffs)
    bad[(2, 1)] = bad[(2, 1)] + 1
    broken = ModularPolynomialTable(2, bad)
    with pytest.raises(VerificationFailure):
        broken.validate(30)
