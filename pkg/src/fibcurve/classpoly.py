"""Hilbert class polynomials: complex-analytic and CRT/isogeny-volcano.

The analytic path evaluates j at the reduced-form roots with mpmath at a
precision chosen from the standard height estimate, rounds, and enforces
the integrality and cube-root checks.  The CRT path assembles H_D from
its reductions at small split primes eta with 4*eta = t^2 + v^2|D|,
walking depth-zero isogeny volcanoes; plan primes are chosen with v = 1
(v = 2 for D = 1 mod 8, where parity forces it) so every sampled curve
already has the maximal order as endomorphism ring.
"""

import random
from dataclasses import dataclass
from typing import NamedTuple

import mpmath

from . import polyring as pr
from .curve import (
    CurveOverPrimeRing,
    order_bsgs,
    order_exhaustive,
    scalar_mul,
)
from .errors import DomainError, ResourceError, VerificationFailure, VolcanoError
from .forms import reduced_forms
from .modpoly import available_levels, j_series, load_table
from .modular import jacobi, sqrt_mod

CRT_DESK_BOUND = 10**4
MAX_SERIES_TERMS = 4000


def j_from_tau(tau, precision):
    """j(tau) as an mpmath complex number, correct to `precision` digits.

    tau must satisfy Im(tau) >= sqrt(3)/2, which holds for every root of
    a reduced form.
    """
    im = float(mpmath.im(tau))
    if im < 0.86:
        raise DomainError("tau must lie in the standard fundamental domain")
    # |c_n q^n| ~ exp(4 pi sqrt(n) - 2 pi n Im tau); find a safe cutoff
    terms = 8
    while True:
        decay = 2 * 3.14159265 * terms * im - 4 * 3.14159265 * (terms**0.5)
        if decay > (precision + 12) * 2.302585 + 6:
            break
        terms += 4 + terms // 4
        if terms > MAX_SERIES_TERMS:
            raise ResourceError("requested precision needs too many terms")
    coeffs = j_series(terms + 2)
    with mpmath.workdps(precision + 18):
        q = mpmath.expjpi(2 * tau)
        acc = mpmath.mpc(0)
        qn = 1 / q
        for c in coeffs:
            acc += c * qn
            qn *= q
        return +acc


@dataclass(frozen=True)
class ClassPolynomial:
    """Monic H_D(X); coeffs ascending, including the leading 1.

    modulus is None for the integer polynomial, else the reduction prime.
    """

    D: int
    coeffs: tuple
    method: str
    modulus: int | None = None

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def reduce_mod(self, p):
        if self.modulus is not None:
            if self.modulus != p:
                raise DomainError("already reduced at a different modulus")
            return self
        return ClassPolynomial(
            D=self.D,
            coeffs=tuple(c % p for c in self.coeffs),
            method=self.method,
            modulus=p,
        )

    def as_list(self, p=None):
        if p is None:
            return list(self.coeffs)
        return [c % p for c in self.coeffs]


def _precision_for(D, forms):
    total = sum(mpmath.mpf(1) / f.a for f in forms)
    with mpmath.workdps(20):
        extra = mpmath.pi * mpmath.sqrt(abs(D)) * total / mpmath.log(10)
        return 15 + int(mpmath.ceil(extra))


def _integer_cube_root(n):
    """Exact integer cube root of n (sign-aware), or None."""
    if n < 0:
        r = _integer_cube_root(-n)
        return None if r is None else -r
    if n == 0:
        return 0
    r = 1 << ((n.bit_length() + 2) // 3)
    while True:
        nr = (2 * r + n // (r * r)) // 3
        if nr >= r:
            break
        r = nr
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**3 == n:
            return cand
    return None


def hilbert_analytic(D, precision=None):
    """H_D(X) with integer coefficients from j evaluated at form roots."""
    forms = reduced_forms(D)
    if not forms:
        raise DomainError("no reduced forms; bad discriminant")
    digits = precision or _precision_for(D, forms)
    for attempt in range(3):
        result = _hilbert_attempt(D, forms, digits)
        if result is not None:
            return result
        digits *= 2
    raise ResourceError("rounding unstable even after precision doubling")


def _hilbert_attempt(D, forms, digits):
    with mpmath.workdps(digits + 10):
        sqrtD = mpmath.sqrt(mpmath.mpf(D))  # purely imaginary
        js = []
        for f in forms:
            tau = (-f.b + sqrtD) / (2 * f.a)
            js.append(j_from_tau(tau, digits))
        poly = [mpmath.mpc(1)]
        for j in js:
            nxt = [mpmath.mpc(0)] * (len(poly) + 1)
            for i, c in enumerate(poly):
                nxt[i + 1] += c
                nxt[i] -= c * j
            poly = nxt
        coeffs = []
        for c in poly:
            real = mpmath.re(c)
            nearest = int(mpmath.nint(real))
            if abs(real - nearest) > 0.01 or abs(mpmath.im(c)) > 0.01:
                return None
            coeffs.append(nearest)
    if coeffs[-1] != 1:
        return None
    if _integer_cube_root(coeffs[0] if len(coeffs) else 0) is None:
        raise VerificationFailure("constant term of H_D is not a perfect cube")
    return ClassPolynomial(D=D, coeffs=tuple(coeffs), method="analytic")


def rounding_residues(D, precision=None):
    """Max coefficient rounding residue at the default precision policy."""
    forms = reduced_forms(D)
    digits = precision or _precision_for(D, forms)
    with mpmath.workdps(digits + 10):
        sqrtD = mpmath.sqrt(mpmath.mpf(D))
        poly = [mpmath.mpc(1)]
        for f in forms:
            j = j_from_tau((-f.b + sqrtD) / (2 * f.a), digits)
            nxt = [mpmath.mpc(0)] * (len(poly) + 1)
            for i, c in enumerate(poly):
                nxt[i + 1] += c
                nxt[i] -= c * j
            poly = nxt
        worst = mpmath.mpf(0)
        for c in poly:
            worst = max(worst, abs(mpmath.re(c) - mpmath.nint(mpmath.re(c))))
            worst = max(worst, abs(mpmath.im(c)))
        return float(worst)


@dataclass(frozen=True)
class CrtPlan:
    D: int
    primes: tuple  # (eta, t, v) triples
    coeff_bound: int


def _coefficient_bound(D, forms):
    with mpmath.workdps(25):
        sqrtD = mpmath.sqrt(mpmath.mpf(D))
        prod = mpmath.mpf(1)
        for f in forms:
            tau = (-f.b + sqrtD) / (2 * f.a)
            prod *= 1 + abs(j_from_tau(tau, 12)) + 1
        return int(mpmath.ceil(2 * prod)) + 1


def _is_prime_small(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1 if d == 2 else 2
    return True


def build_crt_plan(D, avoid=()):
    """Smallest split primes eta with 4*eta = t^2 + v^2 |D| until the
    product clears twice the coefficient bound.

    v is locked to 1 (or 2 when D = 1 mod 8 forces even v) so sampled
    curves always carry the maximal order.
    """
    if D >= 0 or -D > CRT_DESK_BOUND:
        raise ResourceError("CRT plan only built at desk scale")
    forms = reduced_forms(D)
    bound = _coefficient_bound(D, forms)
    absD = -D
    if D % 8 in (5, -3) or D % 4 == 0:
        vs = (1,) if D % 4 != 0 else (1,)
    else:  # D = 1 mod 8: parity forces v even
        vs = (2,)
    candidates = []
    for v in vs:
        t = 1 if (v * v * absD) % 2 == 1 else 2
        while True:
            n4 = t * t + v * v * absD
            if n4 % 4 == 0:
                eta = n4 // 4
                if eta > 4 * bound.bit_length() ** 2 + 8 * absD + 10**7:
                    break
                if eta > 3 and eta not in avoid and absD % eta != 0:
                    if _is_prime_small(eta):
                        candidates.append((eta, t, v))
            t += 2
            if t * t > 16 * bound.bit_length() ** 2 * absD + 64 * absD + 4 * 10**6:
                break
    candidates.sort()
    chosen = []
    prod = 1
    for eta, t, v in candidates:
        chosen.append((eta, t, v))
        prod *= eta
        if prod > 2 * bound:
            break
    if prod <= 2 * bound:
        raise ResourceError("could not assemble enough CRT primes")
    return CrtPlan(D=D, primes=tuple(chosen), coeff_bound=bound)


def _order_matches(E, target_orders, rng):
    """Cheap annihilation filter before an exact count."""
    for _ in range(2):
        x = rng.randrange(E.p)
        v = E.rhs(x)
        if v == 0:
            continue
        if jacobi(v, E.p) != 1:
            continue
        P = (x, sqrt_mod(v, E.p))
        if all(scalar_mul(N, P, E) is not None for N in target_orders):
            return False
        return True
    return True  # could not sample; let the exact count decide


def ell_t_curve_sample(eta, t, allow_special=False):
    """j-invariant of a curve over F_eta with trace t or -t.

    Iterates the one-parameter family Y^2 = X^3 + aX - a, whose
    j-invariants cover everything except 0 and 1728; those two values
    only ever matter for |D| <= 4 (allow_special relaxes the filter and
    scans Y^2 = X^3 + c / Y^2 = X^3 + cX as well).
    """
    if not _is_prime_small(eta) or eta > 10**6:
        raise DomainError("eta must be a prime at desk scale")
    if t * t > 4 * eta:
        raise DomainError("trace outside the Hasse interval")
    targets = {eta + 1 - t, eta + 1 + t}
    rng = random.Random(eta * 1000003 + t)
    small = eta < 10000

    def order_of(E):
        # target curves (v = 1) are near-cyclic, so a persistently
        # ambiguous exponent already rules a candidate out
        if small:
            return order_exhaustive(E)
        try:
            return order_bsgs(E, seed=eta)
        except ResourceError:
            return -1

    for a in range(1, eta):
        if (4 * a + 27) % eta == 0:
            continue
        E = CurveOverPrimeRing(eta, a, (-a) % eta)
        if not _order_matches(E, targets, rng):
            continue
        if order_of(E) in targets:
            return E.j_invariant()
    if allow_special:
        for b in range(1, eta):
            E = CurveOverPrimeRing(eta, 0, b)
            if order_of(E) in targets:
                return 0
        for a in range(1, eta):
            try:
                E = CurveOverPrimeRing(eta, a, 0)
            except DomainError:
                continue
            if order_of(E) in targets:
                return 1728 % eta
    raise DomainError(f"no curve with trace {t} over F_{eta} found")


def kronecker_at(D, ell):
    """Kronecker symbol (D | ell) for prime ell, including ell = 2."""
    if ell == 2:
        if D % 2 == 0:
            return 0
        return 1 if D % 8 == 1 else -1
    if D % ell == 0:
        return 0
    return jacobi(D % ell, ell)


def _phi_roots(level, j0, eta, tables):
    table = tables[level]
    poly = table.evaluate_at_y(j0, eta)
    return pr.roots(poly, eta)


def ascend_to_surface(j0, eta, tables):
    """Climb a depth-one 2-volcano: floor nodes see exactly one root."""
    if 2 not in tables:
        return j0
    for _ in range(4):
        rts = _phi_roots(2, j0, eta, tables)
        if len(rts) != 1:
            return j0
        j0 = rts[0]
    return j0


def volcano_surface_walk(j0, D, eta, v=1, tables=None, expected=None):
    """Full surface orbit of j0 under prime-form isogeny steps.

    At depth zero every rational root of Phi_l(X, j) is a surface
    neighbor, so the orbit is a breadth-first closure.  Walkable levels
    are shipped table primes that are split or ramified in D and do not
    divide v.  Raises VolcanoError when the orbit size does not match
    the class number.
    """
    tables = tables or {ell: load_table(ell) for ell in available_levels()}
    expected = expected or len(reduced_forms(D))
    walkable = []
    for ell in sorted(tables):
        if v % ell == 0:
            continue
        if kronecker_at(D, ell) != -1:
            walkable.append(ell)
    orbit = {j0}
    frontier = [j0]
    while frontier:
        cur = frontier.pop()
        for ell in walkable:
            for r in _phi_roots(ell, cur, eta, tables):
                if r not in orbit:
                    orbit.add(r)
                    frontier.append(r)
        if len(orbit) > expected:
            raise VolcanoError(
                f"orbit exceeded h(D)={expected} at eta={eta}; depth > 0?"
            )
    if len(orbit) != expected:
        raise VolcanoError(
            f"orbit size {len(orbit)} != h(D) {expected} at eta={eta}"
        )
    return orbit


def _hd_mod_eta(D, eta, t, v, h, tables):
    allow_special = -D <= 4
    j0 = ell_t_curve_sample(eta, t, allow_special=allow_special)
    if v % 2 == 0:
        j0 = ascend_to_surface(j0, eta, tables)
    try:
        orbit = volcano_surface_walk(j0, D, eta, v=v, tables=tables, expected=h)
    except VolcanoError:
        # shipped-table prime forms need not generate C(D); widening the
        # orbit with extra trace-matched samples stays sound because v
        # pins the endomorphism ring
        orbit = {j0}
        seen_a = set()
        rng = random.Random(eta)
        guard = 0
        while len(orbit) < h:
            guard += 1
            if guard > 4 * h + 20:
                raise
            j_extra = _extra_sample(D, eta, t, v, orbit, tables)
            if j_extra is None:
                raise
            orbit |= _orbit_closure(j_extra, D, eta, v, tables, h - len(orbit) + 1)
    poly = [1]
    for j in sorted(orbit):
        poly = pr.pmul(poly, [(-j) % eta, 1], eta)
    return poly


def _orbit_closure(j0, D, eta, v, tables, cap):
    try:
        return volcano_surface_walk(j0, D, eta, v=v, tables=tables, expected=cap)
    except VolcanoError:
        # partial orbits still help; recompute closure without the size check
        orbit = {j0}
        frontier = [j0]
        walkable = [
            ell for ell in sorted(tables) if v % ell and kronecker_at(D, ell) != -1
        ]
        while frontier:
            cur = frontier.pop()
            for ell in walkable:
                for r in _phi_roots(ell, cur, eta, tables):
                    if r not in orbit:
                        orbit.add(r)
                        frontier.append(r)
        return orbit


def _extra_sample(D, eta, t, v, exclude, tables):
    """Another trace-(+-t) curve whose j is not already in the orbit."""
    targets = {eta + 1 - t, eta + 1 + t}
    small = eta < 10000
    rng = random.Random(eta ^ 0x5EED)
    for a in range(1, eta):
        if (4 * a + 27) % eta == 0:
            continue
        E = CurveOverPrimeRing(eta, a, (-a) % eta)
        j = E.j_invariant()
        if j in exclude:
            continue
        if not _order_matches(E, targets, rng):
            continue
        if small:
            N = order_exhaustive(E)
        else:
            try:
                N = order_bsgs(E, seed=a)
            except ResourceError:
                continue
        if N in targets:
            if v % 2 == 0:
                j = ascend_to_surface(j, eta, tables)
                if j in exclude:
                    continue
            return j
    return None


_CRT_CACHE = {}


def hilbert_crt_integer(D):
    """Exact integer H_D assembled from the CRT plan (cached per D)."""
    if D in _CRT_CACHE:
        return _CRT_CACHE[D]
    plan = build_crt_plan(D)
    h = len(reduced_forms(D))
    tables = {ell: load_table(ell) for ell in available_levels()}
    residues = []
    for eta, t, v in plan.primes:
        residues.append((_hd_mod_eta(D, eta, t, v, h, tables), eta))
    modulus = 1
    coeffs = [0] * (h + 1)
    for poly, eta in residues:
        poly = poly + [0] * (h + 1 - len(poly))
        if modulus == 1:
            coeffs = list(poly)
            modulus = eta
            continue
        inv = pow(modulus, -1, eta)
        new = []
        for c_old, c_eta in zip(coeffs, poly):
            tt = (c_eta - c_old) * inv % eta
            new.append(c_old + modulus * tt)
        coeffs = new
        modulus *= eta
    lifted = [c - modulus if c > modulus // 2 else c for c in coeffs]
    if any(abs(c) > plan.coeff_bound for c in lifted):
        raise VerificationFailure("CRT lift exceeded the coefficient bound")
    if lifted[-1] != 1:
        raise VerificationFailure("CRT polynomial is not monic")
    result = ClassPolynomial(D=D, coeffs=tuple(lifted), method="crt")
    _CRT_CACHE[D] = result
    return result


def hilbert_crt(D, p):
    """H_D(X) mod p via the CRT/volcano method."""
    return hilbert_crt_integer(D).reduce_mod(p)


class RootHit(NamedTuple):
    value: int
    special: bool  # True when only 0 / 1728 roots exist


def root_mod(H, p):
    """A root of H_D mod p, preferring r not in {0, 1728}; None if no root.

    Deterministic: smallest acceptable root first.
    """
    coeffs = H.as_list(p) if isinstance(H, ClassPolynomial) else [c % p for c in H]
    rts = pr.roots(coeffs, p)
    if not rts:
        return None
    special_values = {0, 1728 % p}
    good = [r for r in rts if r not in special_values]
    if good:
        return RootHit(value=min(good), special=False)
    return RootHit(value=min(rts), special=True)
