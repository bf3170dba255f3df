"""The layered primality stack.

Everything here treats arithmetic failure as evidence: a square root
that does not square back, a point addition with a non-invertible
denominator, a missing table entry -- each refutes primality of the
modulus, usually with a factor attached.  ECPP certificates are built
with a descending chain that grounds out below a trial-division floor.
"""

import random
from dataclasses import dataclass, field
from math import isqrt, log

from .classpoly import hilbert_analytic, root_mod
from .curve import (
    AddFailure,
    CurveOverPrimeRing,
    curve_from_j,
    higher_twists,
    quadratic_twist,
    scalar_mul,
    smallest_nonresidue,
)
from .errors import CompositeSignal, DomainError
from .fib import fib, fib_mod, pisano_period
from .modular import cornacchia, jacobi, sqrt_mod

TRIAL_DIVISION_FLOOR = 10**6
SMALL_FACTOR_BOUND = 10**4
FIXED_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71)


def is_prime_trial(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1 if d == 2 else 2
    return True


@dataclass
class DensityReport:
    N: int
    scan_bound: int
    scanned: int
    residues: list
    first_nonresidue: int | None
    trials_to_nonresidue: int
    expected_residues: float
    verdict: str  # "plausible" | "suspicious"

    def to_dict(self):
        return {
            "scan_bound": self.scan_bound,
            "scanned": self.scanned,
            "residue_count": len(self.residues),
            "first_nonresidue": self.first_nonresidue,
            "trials_to_nonresidue": self.trials_to_nonresidue,
            "expected_residues": round(self.expected_residues, 3),
            "verdict": self.verdict,
        }


def _primes_up_to(bound):
    if bound < 2:
        return []
    sieve = bytearray([1]) * (bound + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, isqrt(bound) + 1):
        if sieve[i]:
            sieve[i * i :: i] = b"\x00" * len(sieve[i * i :: i])
    return [i for i in range(2, bound + 1) if sieve[i]]


def density_test(N):
    """Quadratic-residue density scan over primes up to 2 ln^2 N.

    Roughly half the scanned primes should be residues; a long wait for
    the first non-residue or a residue count off by more than a factor
    of two from ln^2 N is suspicious.  (Perfect squares fail hard: every
    Jacobi symbol lands in {0, +1}.)
    """
    if N <= 1000 or N % 2 == 0:
        raise DomainError("density test wants odd N > 1000")
    bound = int(2 * log(N) ** 2)
    primes = _primes_up_to(bound)
    residues = []
    first_nr = None
    trials = 0
    for ell in primes:
        s = jacobi(ell % N, N)
        if first_nr is None:
            trials += 1
        if s == 1:
            residues.append(ell)
        elif s == -1 and first_nr is None:
            first_nr = ell
    # Chebotarev: about half the scanned primes should be residues.  The
    # count is compared against scanned/2 (a literal ln^2 N target cannot
    # be met: fewer than ln^2 N primes lie under the scan bound).
    expected = len(primes) / 2
    suspicious = False
    if first_nr is None or trials >= 50:
        suspicious = True
    if not (expected / 2 <= len(residues) <= 3 * expected / 2):
        suspicious = True
    return DensityReport(
        N=N,
        scan_bound=bound,
        scanned=len(primes),
        residues=residues,
        first_nonresidue=first_nr,
        trials_to_nonresidue=trials,
        expected_residues=expected,
        verdict="suspicious" if suspicious else "plausible",
    )


@dataclass(frozen=True)
class RMResult:
    verdict: str  # "probable-prime" | "composite"
    witness: int | None
    bases: tuple

    def to_dict(self):
        return {"verdict": self.verdict, "witness": self.witness, "bases": list(self.bases)}


def rabin_miller(N, witness_count=20, seed=None, bases=None):
    """Strong pseudoprime test over seeded-random or fixed bases."""
    if N <= 3 or N % 2 == 0:
        raise DomainError("N must be odd and > 3")
    if bases is None:
        rng = random.Random(seed if seed is not None else 0x5EED ^ N)
        bases = tuple(rng.randrange(2, N - 1) for _ in range(witness_count))
    d, e = N - 1, 0
    while d % 2 == 0:
        d //= 2
        e += 1
    for a in bases:
        a %= N
        if a in (0, 1, N - 1):
            continue
        b = pow(a, d, N)
        if b in (1, N - 1):
            continue
        for _ in range(e - 1):
            b = b * b % N
            if b == N - 1:
                break
        else:
            return RMResult("composite", a, tuple(bases))
    return RMResult("probable-prime", None, tuple(bases))


def rabin_miller_fixed(N):
    """Deterministic regime: the first twenty primes as bases."""
    return rabin_miller(N, bases=FIXED_BASES)


def exceeds_ecpp_bound(q, N):
    """Exact integer test for q > (N^(1/4) + 1)^2."""
    lhs = q * q + 6 * q + 1 - N
    return lhs > 0 and lhs * lhs > 16 * (q + 1) ** 2 * q


@dataclass
class EcppCertificate:
    """One link of an ECPP chain for subject N."""

    N: int
    D: int
    x: int
    y: int
    p_next: int
    k: int
    q_next: int
    curve_a: int
    curve_b: int
    point: tuple
    chain: "EcppCertificate | None" = None

    def to_dict(self):
        return {
            "subject": str(self.N),
            "discriminant": self.D,
            "x": str(self.x),
            "y": str(self.y),
            "p_next": str(self.p_next),
            "k": str(self.k),
            "q_next": str(self.q_next),
            "curve": {"a": str(self.curve_a), "b": str(self.curve_b)},
            "point": [str(self.point[0]), str(self.point[1])],
            "chain": self.chain.to_dict() if self.chain else None,
        }

    @classmethod
    def from_dict(cls, d):
        chain = d.get("chain")
        return cls(
            N=int(d["subject"]),
            D=int(d["discriminant"]),
            x=int(d["x"]),
            y=int(d["y"]),
            p_next=int(d["p_next"]),
            k=int(d["k"]),
            q_next=int(d["q_next"]),
            curve_a=int(d["curve"]["a"]),
            curve_b=int(d["curve"]["b"]),
            point=(int(d["point"][0]), int(d["point"][1])),
            chain=cls.from_dict(chain) if chain else None,
        )


@dataclass(frozen=True)
class EcppOutcome:
    verdict: str  # "verified" | "refuted"
    reason: str = ""
    factor: int | None = None


def ecpp_check(cert):
    """Verify an ECPP certificate chain down to the trial-division floor."""
    N = cert.N
    if N <= 6:
        return EcppOutcome("refuted", "subject too small for the theorem")
    if N % 2 == 0:
        return EcppOutcome("refuted", "subject is even")
    if 4 * N != cert.x * cert.x + abs(cert.D) * cert.y * cert.y:
        return EcppOutcome("refuted", "norm-equation")
    if cert.p_next not in (N + 1 - cert.x, N + 1 + cert.x):
        return EcppOutcome("refuted", "order-not-in-hasse-pair")
    if cert.k * cert.q_next != cert.p_next:
        return EcppOutcome("refuted", "cofactor-product")
    if not exceeds_ecpp_bound(cert.q_next, N):
        return EcppOutcome("refuted", "q-bound")
    try:
        E = CurveOverPrimeRing(N, cert.curve_a % N, cert.curve_b % N)
    except DomainError:
        return EcppOutcome("refuted", "singular-curve")
    P = (cert.point[0] % N, cert.point[1] % N)
    if not E.contains(P):
        return EcppOutcome("refuted", "point-not-on-curve")
    try:
        U = scalar_mul(cert.k, P, E)
    except AddFailure as e:
        return EcppOutcome("refuted", "add-failure-exposes-factor", e.factor)
    if U is None:
        return EcppOutcome("refuted", "kP-is-infinity")
    try:
        V = scalar_mul(cert.q_next, U, E)
    except AddFailure as e:
        return EcppOutcome("refuted", "add-failure-exposes-factor", e.factor)
    if V is not None:
        return EcppOutcome("refuted", "kqP-not-infinity")
    if cert.q_next < TRIAL_DIVISION_FLOOR:
        if not is_prime_trial(cert.q_next):
            return EcppOutcome("refuted", "q-next-composite")
        return EcppOutcome("verified")
    if cert.chain is None:
        return EcppOutcome("refuted", "missing-chain-for-large-q")
    if cert.chain.N != cert.q_next:
        return EcppOutcome("refuted", "chain-subject-mismatch")
    sub = ecpp_check(cert.chain)
    if sub.verdict != "verified":
        return EcppOutcome("refuted", f"chain: {sub.reason}", sub.factor)
    return EcppOutcome("verified")


def strip_small_factors(n, bound=SMALL_FACTOR_BOUND):
    """(k, m): small prime part and the remaining cofactor.

    Trial division runs up to min(bound, sqrt n), so a prime n survives
    intact as the cofactor, which is what the ECPP cofactor search wants.
    """
    k = 1
    for p in _primes_up_to(min(bound, isqrt(n) + 1)):
        while n % p == 0:
            n //= p
            k *= p
        if n == 1:
            break
    return k, n


def _curve_candidates(N, r, seed):
    """Curves over Z/N whose order could be either Hasse pair member."""
    r %= N
    if r == 0 or r == 1728 % N:
        base = CurveOverPrimeRing(N, 0, 1) if r == 0 else CurveOverPrimeRing(N, 1, 0)
        try:
            return higher_twists(base, N)
        except Exception:
            return [base]
    E = curve_from_j(r, N)
    g = smallest_nonresidue(N)
    return [E, quadratic_twist(E, g)]


def _point_with_order(E, k, q, rng, tries=40):
    """P with k*q*P = O and k*P != O, or None; AddFailure propagates."""
    N = E.p
    for _ in range(tries):
        x = rng.randrange(N)
        v = E.rhs(x)
        if v == 0 or jacobi(v, N) != 1:
            continue
        try:
            y = sqrt_mod(v, N)
        except Exception:
            continue
        if (y * y - v) % N:
            raise CompositeSignal(N, stage="ecpp-point-sqrt")
        P = (x, y)
        U = scalar_mul(k, P, E)
        if U is None:
            continue
        if scalar_mul(q, U, E) is None:
            return P
    return None


def _attempt_certificate(N, D, x, y, seed, prove_next=True, depth=0):
    """Try to turn a norm-equation witness into a verified chain link."""
    rng = random.Random((seed or 1) * 7919 + depth)
    H = hilbert_analytic(D)
    hit = root_mod(H, N)
    if hit is None:
        return None
    for p_next in (N + 1 - x, N + 1 + x):
        if p_next <= 2:
            continue
        k, q = strip_small_factors(p_next)
        if q == 1 or not exceeds_ecpp_bound(q, N):
            continue
        if q >= TRIAL_DIVISION_FLOOR:
            if rabin_miller(q, seed=seed).verdict != "probable-prime":
                continue
        elif not is_prime_trial(q):
            continue
        for E in _curve_candidates(N, hit.value, seed):
            try:
                P = _point_with_order(E, k, q, rng)
            except AddFailure as e:
                raise CompositeSignal(N, factor=e.factor, stage="ecpp-scalar")
            if P is None:
                continue
            chain = None
            if q >= TRIAL_DIVISION_FLOOR and prove_next:
                chain = prove_prime(q, seed=seed, depth=depth + 1)
                if chain is None:
                    continue
            cert = EcppCertificate(
                N=N, D=D, x=x, y=y, p_next=p_next, k=k, q_next=q,
                curve_a=E.a, curve_b=E.b, point=P, chain=chain,
            )
            if ecpp_check(cert).verdict == "verified":
                return cert
    return None


def _fundamental_discs(limit=80):
    """Fundamental discriminants ordered by |D|, for the generic prover."""
    from .forms import is_fundamental

    out = []
    D = -3
    while len(out) < limit:
        try:
            if is_fundamental(D):
                out.append(D)
        except DomainError:
            pass
        D -= 1
    return out


_GENERIC_DISCS = None


def prove_prime(n, seed=0, depth=0):
    """Generic ECPP chain builder for arbitrary subjects.

    Returns an EcppCertificate for n >= the trial-division floor, None
    when a chain could not be assembled (caller treats that as
    inconclusive), and raises CompositeSignal when n is exposed as
    composite along the way.
    """
    global _GENERIC_DISCS
    if depth > 64:
        return None
    if n < TRIAL_DIVISION_FLOOR:
        raise DomainError("below the trial-division floor; no chain needed")
    if rabin_miller(n, seed=seed).verdict == "composite":
        raise CompositeSignal(n, stage="ecpp-chain-rabin-miller")
    if _GENERIC_DISCS is None:
        from .forms import class_number

        _GENERIC_DISCS = [D for D in _fundamental_discs(90) if class_number(D) <= 8]
    for D in _GENERIC_DISCS:
        if jacobi(D % n, n) != 1:
            continue
        try:
            sol = solve_norm_equation(D, n)
        except CompositeSignal:
            raise CompositeSignal(n, stage="ecpp-chain-sqrt")
        if not sol:
            continue
        x, y = sol
        cert = _attempt_certificate(n, D, x, y, seed, depth=depth)
        if cert is not None:
            return cert
    return None


FIB_EXCEPTIONAL_DS = (-1, -2, -3, -7, None)  # None stands for -q


def _field_discriminant(d, q):
    if d == -1:
        return -4
    if d == -2:
        return -8
    if d in (-3, -7):
        return d
    # d = -q
    return -q if q % 4 == 3 else -4 * q


def _symbol_via_periodicity(d, ctx):
    """(d | f_q) using residue tables mod small moduli, never f_q itself."""
    q, f_q = ctx.q, ctx.f_q

    def fq_mod(m):
        return fib_mod(q % pisano_period(m), m)

    if d == -1:
        return 1 if fq_mod(4) == 1 else -1
    if d == -2:
        s2 = 1 if fq_mod(8) in (1, 7) else -1
        s1 = 1 if fq_mod(4) == 1 else -1
        return s1 * s2
    if d in (-3, -7):
        ell = -d
        # f_q = 1 mod 4, so (-ell | f_q) = (ell | f_q) = (f_q | ell)
        r = fq_mod(ell)
        return 0 if r == 0 else jacobi(r, ell)
    # d = -q: (q | f_q) = (f_q mod q | q)
    r = fib_mod(q, q)
    return 0 if r == 0 else jacobi(r, q)


@dataclass
class ExceptionalOutcome:
    verdict: str  # "prime" | "composite" | "probable prime"
    certificate: EcppCertificate | None
    branches: list = field(default_factory=list)

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "certificate": self.certificate.to_dict() if self.certificate else None,
            "branches": self.branches,
        }


def exceptional_cases_test(ctx, seed=0):
    """Small-discriminant ECPP attempts driven by residue shortcuts.

    Walks d in (-1, -2, -3, -7, -q); a verified certificate proves f_q
    prime, arithmetic breakage proves it composite, and exhaustion
    leaves it a probable prime.
    """
    q, f_q = ctx.q, ctx.f_q
    branches = []
    for d in FIB_EXCEPTIONAL_DS:
        dval = d if d is not None else -q
        D = _field_discriminant(dval, q)
        s = _symbol_via_periodicity(dval, ctx)
        if s != 1:
            branches.append({"d": dval, "symbol": s, "stage": "symbol"})
            continue
        try:
            sol = _norm_equation_for_branch(ctx, dval, D)
        except CompositeSignal as e:
            return ExceptionalOutcome("composite", None, branches + [
                {"d": dval, "stage": "norm-equation", "factor": e.factor}
            ])
        if not sol:
            branches.append({"d": dval, "symbol": 1, "stage": "cornacchia"})
            continue
        x, y = sol
        try:
            cert = _attempt_certificate(f_q, D, x, y, seed)
        except CompositeSignal as e:
            return ExceptionalOutcome("composite", None, branches + [
                {"d": dval, "stage": "ecpp", "factor": e.factor}
            ])
        if cert is not None:
            branches.append({"d": dval, "symbol": 1, "stage": "verified",
                             "p_next": str(cert.p_next)})
            return ExceptionalOutcome("prime", cert, branches)
        branches.append({"d": dval, "symbol": 1, "stage": "no-usable-cofactor",
                         "x": str(x)})
    return ExceptionalOutcome("probable prime", None, branches)


def solve_norm_equation(D, n, table=None):
    """(x, y) with 4n = x^2 + |D| y^2, primitive at the field level.

    Odd D: modified Cornacchia on 4n with a parity-adjusted root (x, y
    both odd).  Even D: the representation always has even x, so the
    primitive solve runs on n = u^2 + (|D|/4) v^2 and x = 2u.  Returns
    None when n is not a norm; CompositeSignal propagates from square
    roots that expose a composite n.
    """
    try:
        if D % 4 == 0:
            d4 = abs(D) // 4
            if d4 >= n:
                return None
            hint = sqrt_mod((D // 4) % n, n, table)
            sol = cornacchia(d4, n, root_hint=hint)
            if not sol:
                return None
            u, v = sol
            return (2 * u, v)
        root = sqrt_mod(D % n, n, table)
        hint = root if (root - D) % 2 == 0 else n - root
        sol = cornacchia(abs(D), 4 * n, root_hint=hint)
        return tuple(sol) if sol else None
    except CompositeSignal:
        raise
    except Exception:
        return None


def _norm_equation_for_branch(ctx, d, D):
    """4 f_q = x^2 + |D| y^2 via the cheapest available witness."""
    q, f_q = ctx.q, ctx.f_q
    if d == -1:
        # Cassini split: f_q = f_{(q+1)/2}^2 + f_{(q-1)/2}^2
        u, v = fib((q + 1) // 2), fib((q - 1) // 2)
        if u * u + v * v != f_q:
            raise CompositeSignal(f_q, stage="cassini-split")
        return (2 * u, v)
    return solve_norm_equation(D, f_q)
