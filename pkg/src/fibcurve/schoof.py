"""Trace computation and the two final verification passes.

Full Schoof works in R = F_p[X,Y]/(M(X), Y^2 - f(X)) for M a divisor of
the division polynomial.  Points are (u, c) pairs standing for
(u, y*c); zero-divisor denominators split M and restart, which is the
standard fallback when psi is reducible.  Eigenvalue verification
factors psi and tests how Frobenius scales each kernel factor.
"""

from dataclasses import dataclass
from math import isqrt

from . import polyring as pr
from .classpoly import kronecker_at
from .errors import CompositeSignal, DomainError, VerificationFailure
from .modpoly import available_levels, load_table
from .modular import jacobi, sqrt_mod


@dataclass(frozen=True)
class DivisionPolynomial:
    ell: int
    poly: tuple  # y-free coefficients, ascending


@dataclass(frozen=True)
class KernelPolynomial:
    ell: int
    poly: tuple
    eigenvalue: int


@dataclass(frozen=True)
class TraceWitness:
    ell: int
    t_mod: int
    method: str  # "full-schoof" | "eigenvalue"


def division_poly_table(E, n_max):
    """x-only division polynomials P[0..n_max].

    Convention: psi_k = P[k] for odd k and psi_k = y * P[k] for even k,
    with y^2 folded through f = x^3 + ax + b.
    """
    p = E.p
    a, b = E.a % p, E.b % p
    f = [b, a, 0, 1]
    f2 = pr.pmul(f, f, p)
    inv2 = pow(2, -1, p)
    P = {0: [], 1: [1], 2: [2]}
    P[3] = [i % p for i in (-a * a % p, 12 * b, 6 * a, 0, 3)]
    P[4] = pr.pscale(
        [
            (-8 * b * b - a**3) % p,
            (-4 * a * b) % p,
            (-5 * a * a) % p,
            20 * b % p,
            5 * a % p,
            0,
            1,
        ],
        4,
        p,
    )

    def get(k):
        if k in P:
            return P[k]
        m = k // 2
        if k % 2 == 1:
            left = pr.pmul(get(m + 2), pr.pmul(get(m), pr.pmul(get(m), get(m), p), p), p)
            right = pr.pmul(get(m - 1), pr.pmul(get(m + 1), pr.pmul(get(m + 1), get(m + 1), p), p), p)
            if m % 2 == 0:
                val = pr.psub(pr.pmul(f2, left, p), right, p)
            else:
                val = pr.psub(left, pr.pmul(f2, right, p), p)
        else:
            # psi_2m = psi_m (psi_{m+2} psi_{m-1}^2 - psi_{m-2} psi_{m+1}^2) / 2y;
            # the y^2 from the even-index squares cancels the denominator,
            # so no f factor appears in either parity
            t1 = pr.pmul(get(m + 2), pr.pmul(get(m - 1), get(m - 1), p), p)
            t2 = pr.pmul(get(m - 2), pr.pmul(get(m + 1), get(m + 1), p), p)
            inner = pr.psub(t1, t2, p)
            val = pr.pscale(pr.pmul(get(m), inner, p), inv2, p)
        P[k] = val
        return val

    for k in range(5, n_max + 1):
        get(k)
    return P


def division_poly(E, ell):
    """The ell-division polynomial (odd ell), degree (ell^2 - 1)/2."""
    if ell < 3 or ell % 2 == 0:
        raise DomainError("ell must be an odd prime")
    if ell % E.p == 0:
        raise DomainError("ell must differ from the field characteristic")
    P = division_poly_table(E, ell)
    return DivisionPolynomial(ell=ell, poly=tuple(P[ell]))


class _Split(Exception):
    def __init__(self, factor):
        self.factor = factor


class SchoofRing:
    """F_p[X, Y] / (M(X), Y^2 - f(X)) with (u, y*c) point arithmetic."""

    def __init__(self, E, M):
        self.p = E.p
        self.a = E.a % E.p
        self.M = pr.monic([c % E.p for c in M], E.p)
        self.f = pr.pmod([E.b % E.p, self.a, 0, 1], self.M, E.p)

    def red(self, poly):
        return pr.pmod(poly, self.M, self.p)

    def is_zero(self, poly):
        return not pr.trim([c % self.p for c in poly])

    def inv(self, poly):
        poly = self.red(poly)
        if self.is_zero(poly):
            raise _Split(self.M)
        g = pr.pgcd(poly, self.M, self.p)
        if pr.deg(g) > 0:
            raise _Split(g)
        # extended Euclid on (poly, M)
        r0, r1 = list(self.M), list(poly)
        s0, s1 = [], [1]
        while r1:
            q, r = pr.pdivmod(r0, r1, self.p)
            r0, r1 = r1, r
            s0, s1 = s1, pr.psub(s0, pr.pmul(q, s1, self.p), self.p)
        lead_inv = pow(r0[-1], -1, self.p)
        return self.red(pr.pscale(s0, lead_inv, self.p))

    def mul(self, x, y):
        return self.red(pr.pmul(x, y, self.p))

    def neg_pt(self, P):
        if P is None:
            return None
        return (P[0], pr.pscale(P[1], -1, self.p))

    def eq_pt(self, P, Q):
        if P is None or Q is None:
            return P is None and Q is None
        return self.is_zero(pr.psub(P[0], Q[0], self.p)) and self.is_zero(
            pr.psub(P[1], Q[1], self.p)
        )

    def add_pts(self, P, Q):
        p = self.p
        if P is None:
            return Q
        if Q is None:
            return P
        u1, c1 = P
        u2, c2 = Q
        du = pr.psub(u1, u2, p)
        if self.is_zero(du):
            csum = pr.padd(c1, c2, p)
            if self.is_zero(csum):
                return None
            cdiff = pr.psub(c1, c2, p)
            if not self.is_zero(cdiff):
                g = pr.pgcd(cdiff, self.M, p)
                if 0 < pr.deg(g) < pr.deg(self.M):
                    raise _Split(g)
                g2 = pr.pgcd(csum, self.M, p)
                if 0 < pr.deg(g2) < pr.deg(self.M):
                    raise _Split(g2)
                raise CompositeSignal(p, stage="schoof-point-mismatch")
            # tangent: mu = (3u^2 + a)/(2 f c)
            num = pr.padd(pr.pscale(self.mul(u1, u1), 3, p), [self.a], p)
            den = pr.pscale(self.mul(self.f, c1), 2, p)
            mu = self.mul(num, self.inv(den))
            x3 = pr.psub(self.mul(self.f, self.mul(mu, mu)), pr.pscale(u1, 2, p), p)
            c3 = pr.psub(self.mul(mu, pr.psub(u1, x3, p)), c1, p)
            return (self.red(x3), self.red(c3))
        mu = self.mul(pr.psub(c1, c2, p), self.inv(du))
        x3 = pr.psub(
            pr.psub(self.mul(self.f, self.mul(mu, mu)), u1, p), u2, p
        )
        c3 = pr.psub(self.mul(mu, pr.psub(u1, x3, p)), c1, p)
        return (self.red(x3), self.red(c3))

    def scalar_pt(self, k, P):
        R = None
        Q = P
        while k:
            if k & 1:
                R = self.add_pts(R, Q)
            Q = self.add_pts(Q, Q)
            k >>= 1
        return R

    def frobenius_pt(self, power=1):
        """(X^(p^power), Y^(p^power)) as a symbolic point."""
        e = self.p**power
        u = pr.ppowmod(pr.pX(), e, self.M, self.p)
        c = pr.ppowmod(self.f, (e - 1) // 2, self.M, self.p)
        return (u, c)


def schoof_trace_mod(E, ell):
    """Trace of Frobenius mod ell by the torsion-ring congruence."""
    if ell % 2 == 0 or ell < 3:
        raise DomainError("ell must be an odd prime")
    if E.p % ell == 0:
        raise DomainError("ell equals the characteristic")
    psi = list(division_poly(E, ell).poly)
    M = psi
    while True:
        try:
            return TraceWitness(ell, _trace_attempt(E, ell, M), "full-schoof")
        except _Split as s:
            g = s.factor
            other = pr.pdivmod(M, g, E.p)[0]
            M = min((g, other), key=pr.deg) if pr.deg(other) > 0 else g
            if pr.deg(M) < 1:
                raise CompositeSignal(E.p, stage="schoof-split-exhausted")


def _trace_attempt(E, ell, M):
    R = SchoofRing(E, M)
    pi = R.frobenius_pt(1)
    pi2 = R.frobenius_pt(2)
    k = E.p % ell
    base = (pr.pmod(pr.pX(), R.M, R.p), [1])
    kP = R.scalar_pt(k, base)
    S = R.add_pts(pi2, kP)
    if S is None:
        return 0
    T = pi
    for tau in range(1, (ell - 1) // 2 + 1):
        if R.eq_pt(S, T):
            return tau
        if R.eq_pt(S, R.neg_pt(T)):
            return (-tau) % ell
        T = R.add_pts(T, pi)
    raise CompositeSignal(E.p, stage="schoof-no-trace")


def _trace_moduli(p, levels=(3, 5, 7, 11, 13, 17, 19)):
    need = 4 * isqrt(p) + 2
    out = []
    prod = 2  # the parity bit contributes a factor of 2
    for ell in levels:
        if p % ell == 0:
            continue
        out.append(ell)
        prod *= ell
        if prod > need:
            return out
    raise DomainError("not enough small primes for this field size")


def trace_parity(E):
    """t mod 2: even exactly when f has a root, i.e. 2-torsion exists."""
    p = E.p
    f = [E.b % p, E.a % p, 0, 1]
    xp = pr.ppowmod(pr.pX(), p, f, p)
    g = pr.pgcd(pr.psub(xp, pr.pX(), p), f, p)
    return 0 if pr.deg(g) >= 1 else 1


def schoof_trace(E):
    """Full trace |t| <= 2 sqrt(p) via CRT over small primes."""
    p = E.p
    residues = [(trace_parity(E), 2)]
    for ell in _trace_moduli(p):
        residues.append((schoof_trace_mod(E, ell).t_mod, ell))
    t, modulus = 0, 1
    for r, m in residues:
        k = (r - t) * pow(modulus, -1, m) % m
        t += modulus * k
        modulus *= m
    bound = isqrt(4 * p)
    t %= modulus
    if t > modulus // 2:
        t -= modulus
    if abs(t) > bound:
        raise CompositeSignal(p, stage="schoof-trace-out-of-range")
    return t


def is_elkies(E, ell, tables=None):
    """Whether Phi_ell(X, j(E)) has a root in F_p.

    The root criterion is equivalent to (t^2 - 4p | ell) != -1 away from
    j in {0, 1728}; at the special invariants the gcd is still computed
    honestly but extra automorphisms can break the equivalence, which is
    why the verification passes route those candidates elsewhere.
    """
    tables = tables or {lv: load_table(lv) for lv in available_levels()}
    if ell not in tables:
        raise DomainError(f"no modular polynomial table for {ell}")
    return _phi_gcd_degree(E, ell, tables) >= 1


def _phi_gcd_degree(E, ell, tables):
    p = E.p
    poly = tables[ell].evaluate_at_y(E.j_invariant(), p)
    xp = pr.ppowmod(pr.pX(), p, poly, p)
    g = pr.pgcd(pr.psub(xp, pr.pX(), p), poly, p)
    return pr.deg(g)


def _eigenvalue_of_factor(E, h, ell, psi_table):
    """The lambda with (X^p, Y^p) = lambda*(X, Y) mod h, or None."""
    R = SchoofRing(E, h)
    try:
        pi = R.frobenius_pt(1)
        base = (pr.pmod(pr.pX(), R.M, R.p), [1])
        T = base
        for lam in range(1, ell):
            if R.eq_pt(pi, T):
                return lam
            T = R.add_pts(T, base)
    except (_Split, CompositeSignal):
        return None
    return None


def eigenspace_kernels(E, ell):
    """(kernel polynomial, eigenvalue) pairs for Frobenius on E[ell].

    When Frobenius acts as a scalar every subgroup is an eigenspace and
    the stable factors outnumber one kernel's worth; any exact-degree
    subset of one eigenvalue's factors is a valid Frobenius-stable
    kernel, so the assembly is a deterministic greedy pick.
    """
    p = E.p
    psi = list(division_poly(E, ell).poly)
    target = (ell - 1) // 2
    factors = _factors_up_to_degree(psi, p, target)
    by_lambda = {}
    for h in sorted(factors, key=lambda g: (pr.deg(g), list(reversed(g)))):
        lam = _eigenvalue_of_factor(E, h, ell, None)
        if lam is not None:
            by_lambda.setdefault(lam, []).append(h)
    kernels = []
    for lam, hs in sorted(by_lambda.items()):
        poly = [1]
        total = 0
        for h in hs:
            if total + pr.deg(h) > target:
                continue
            poly = pr.pmul(poly, h, p)
            total += pr.deg(h)
            if total == target:
                break
        if total == target:
            kernels.append(KernelPolynomial(ell=ell, poly=tuple(poly), eigenvalue=lam))
    return kernels


def _factors_up_to_degree(f, p, max_deg):
    """Irreducible factors of f of degree <= max_deg (distinct roots case)."""
    import random as _random

    rng = _random.Random(1693)
    f = pr.monic([c % p for c in f], p)
    out = []
    power = pr.ppowmod(pr.pX(), p, f, p)
    d = 1
    while d <= max_deg and pr.deg(f) > 0:
        g = pr.pgcd(pr.psub(power, pr.pX(), p), f, p)
        if pr.deg(g) > 0:
            out.extend(pr._equal_degree_split(g, d, p, rng))
            f = pr.pdivmod(f, g, p)[0]
            power = pr.pmod(power, f, p) if pr.deg(f) else []
        d += 1
        if d <= max_deg and pr.deg(f) > 0:
            power = pr.ppowmod(power, p, f, p)
    return out


def kernel_poly(E, ell):
    """Kernel polynomial of a Frobenius eigenspace for Elkies ell."""
    kernels = eigenspace_kernels(E, ell)
    if not kernels:
        raise VerificationFailure(
            f"no Frobenius eigenspace at {ell}: non-Elkies or composite modulus"
        )
    return kernels[0]


def accepted_eigenvalues(E, ell):
    """Residues mod ell acting as Frobenius on some eigenspace kernel."""
    return sorted({k.eigenvalue for k in eigenspace_kernels(E, ell)})


def char_poly_roots(t, p, ell):
    """Roots of X^2 - tX + p mod ell, or None when irreducible."""
    disc = (t * t - 4 * p) % ell
    if disc == 0:
        half = (t * pow(2, -1, ell)) % ell
        return (half, half)
    if jacobi(disc, ell) != 1:
        return None
    s = sqrt_mod(disc, ell)
    inv2 = pow(2, -1, ell)
    return tuple(sorted(((t + s) * inv2 % ell, (t - s) * inv2 % ell)))


def eigenvalue_verify(E, ell, t):
    """True iff Frobenius acts as a root of X^2 - tX + p on a kernel."""
    roots = char_poly_roots(t, E.p, ell)
    if roots is None:
        raise VerificationFailure(
            f"X^2 - {t}X + p irreducible mod {ell}: contradicts Elkies"
        )
    accepted = accepted_eigenvalues(E, ell)
    return bool(set(roots) & set(accepted))


@dataclass
class Candidate:
    """One (curve, p, D) construction candidate moving through the passes."""

    E: object
    p: int
    D: int
    trace: int
    elkies: tuple = ()
    witnesses: tuple = ()


def elkies_verification_pass(candidates, tables=None):
    """Filter candidates by modular-polynomial root existence per prime.

    Removal rule: a prime with (D|ell) != -1 must give Phi_ell(X, j) a
    root in F_p, and one with (D|ell) = -1 must not.
    """
    tables = tables or {lv: load_table(lv) for lv in available_levels()}
    survivors = []
    transcript = []
    for cand in candidates:
        j = cand.E.j_invariant()
        if j == 0 or j == 1728 % cand.p:
            # extra automorphisms break the root criterion at the special
            # invariants; such candidates go to the trace-congruence path
            cand.elkies = ()
            survivors.append(cand)
            transcript.append((cand.D, cand.p, 0, 0, 0, "special-j-skip"))
            continue
        ok = True
        elkies = []
        disc_pi = cand.trace * cand.trace - 4 * cand.p
        for ell in sorted(tables):
            # the Frobenius discriminant t^2 - 4p = y^2 D drives root
            # existence; (D|ell) alone misreads primes dividing y
            r = kronecker_at(disc_pi, ell)
            d = _phi_gcd_degree(cand.E, ell, tables)
            if r != -1:
                elkies.append(ell)
            if (r != -1 and d == 0) or (r == -1 and d > 0):
                ok = False
                transcript.append((cand.D, cand.p, ell, r, d, "removed"))
                break
            transcript.append((cand.D, cand.p, ell, r, d, "ok"))
        if ok:
            cand.elkies = tuple(elkies)
            survivors.append(cand)
    return survivors, transcript


def eigenvalue_verification_pass(candidates, tables=None):
    """Confirm each candidate's trace through an eigenvalue or full-Schoof
    congruence; candidates failing any congruence are removed."""
    tables = tables or {lv: load_table(lv) for lv in available_levels()}
    survivors = []
    transcript = []
    for cand in candidates:
        usable = [
            ell
            for ell in cand.elkies
            if ell in tables and ell % 2 == 1 and cand.p % ell != 0
        ]
        witnesses = []
        ok = True
        if usable:
            ell = usable[0]
            try:
                ok = eigenvalue_verify(cand.E, ell, cand.trace)
            except VerificationFailure:
                ok = False
            witnesses.append(TraceWitness(ell, cand.trace % ell, "eigenvalue"))
            transcript.append((cand.D, cand.p, ell, "eigenvalue", ok))
        else:
            for ell in (3, 5, 7):
                if cand.p % ell == 0:
                    continue
                w = schoof_trace_mod(cand.E, ell)
                witnesses.append(w)
                good = w.t_mod == cand.trace % ell
                transcript.append((cand.D, cand.p, ell, "full-schoof", good))
                if not good:
                    ok = False
                    break
        if ok:
            cand.witnesses = tuple(witnesses)
            survivors.append(cand)
    return survivors, transcript


def verification_prime_bound(f_q):
    """The small-prime cutoff the verification passes would use at scale."""
    import math

    return 2 * math.log(4 * math.log(f_q) ** 2) ** 2


def modular_precompute_bound(f_q):
    import math

    return 6 * math.log(4 * math.log(f_q) ** 2) ** 2
