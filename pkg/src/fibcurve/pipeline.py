"""End-to-end construction of a curve of order f_q, with certificates.

The walk: density scan, residue-prime basis, good discriminants, square
root precomputation, the Cassini root of -1, the exceptional-cases
test, then the discriminant loop (norm equation, cofactor ECPP,
Rabin-Miller, class polynomial root, curve and twist order checks).
Candidates then pass the modular-polynomial and eigenvalue filters, and
the certificate records every stage.  Any composite evidence anywhere
short-circuits to a composite verdict carrying the witness.
"""

import json
import random
from dataclasses import dataclass, field
from math import log

from .classpoly import hilbert_analytic, hilbert_crt, root_mod
from .config import PipelineConfig
from .curve import (
    AddFailure,
    CurveOverPrimeRing,
    curve_from_j,
    higher_twists,
    order_bsgs,
    order_exhaustive,
    quadratic_twist,
    scalar_mul,
    smallest_nonresidue,
)
from .errors import CompositeSignal, DomainError, ResourceError
from .fib import FibContext, cassini_sqrt_minus_one, legendre_fib
from .modular import cornacchia, jacobi, sqrt_mod, ts_precompute, ts_sqrt
from .primality import (
    EcppCertificate,
    _attempt_certificate,
    density_test,
    ecpp_check,
    exceptional_cases_test,
    rabin_miller,
)
from .schoof import (
    Candidate,
    eigenvalue_verification_pass,
    elkies_verification_pass,
    modular_precompute_bound,
    verification_prime_bound,
)

SCHEMA = "fibcurve.certificate/1"


def residue_primes(ctx, bound):
    """Odd primes ell <= bound with (f_q | ell) = +1, via Pisano reduction."""
    if bound < 3:
        raise DomainError("bound must be at least 3")
    out = []
    from .primality import _primes_up_to

    for ell in _primes_up_to(bound):
        if ell == 2:
            continue
        if legendre_fib(ell, ctx) == 1:
            out.append(ell)
    return out


@dataclass(frozen=True)
class DiscriminantList:
    discs: tuple
    primes: tuple
    bound: int


def good_discriminants(primes, bound=None):
    """Good discriminants -l and -l1*l2 = 5 (mod 8), in basis loop order."""
    primes = sorted(primes)
    out = []
    for k, ell in enumerate(primes):
        if (-ell) % 8 == 5:
            out.append(-ell)
        for m in range(k):
            D = -primes[m] * ell
            if D % 8 == 5:
                out.append(D)
    return DiscriminantList(discs=tuple(out), primes=tuple(primes), bound=bound or 0)


@dataclass
class AttemptResult:
    D: int
    stage: str  # "candidate" | failure stage
    detail: dict = field(default_factory=dict)
    candidate: Candidate | None = None
    point: tuple | None = None
    x: int = 0
    y: int = 0
    ecpp: EcppCertificate | None = None  # f_q certificate from the cofactor branch


class _SqrtCache:
    """Square roots of basis primes mod f_q, combined through the Cassini
    root of -1 to give sqrt(D) for every good discriminant."""

    def __init__(self, ctx, table, cassini_s):
        self.ctx = ctx
        self.table = table
        self.s = cassini_s
        self.roots = {}

    def sqrt_prime(self, ell):
        if ell not in self.roots:
            self.roots[ell] = ts_sqrt(ell % self.ctx.f_q, self.table)
        return self.roots[ell]

    def sqrt_disc(self, D):
        f = self.ctx.f_q
        r = self.s
        n = -D
        from .forms import prime_divisors

        for ell in prime_divisors(n):
            r = r * self.sqrt_prime(ell) % f
        if r * r % f != D % f:
            raise CompositeSignal(f, stage="disc-sqrt-combine")
        return r


def attempt_discriminant(ctx, D, sqrt_cache, config, seed=0):
    """Steps 8-16 of the main walk for one discriminant."""
    f_q = ctx.f_q
    try:
        root = sqrt_cache.sqrt_disc(D)
    except CompositeSignal:
        raise
    hint = root if (root - D) % 2 == 0 else f_q - root
    sol = cornacchia(-D, 4 * f_q, root_hint=hint)
    if not sol:
        return AttemptResult(D=D, stage="cornacchia")
    x, y = sol
    ecpp_cert = None
    last_stage = "p-not-prime"
    detail = {}
    for p in (f_q + 1 - x, f_q + 1 + x):
        if p <= 3:
            continue
        # cofactor ECPP branch: any easily-factored p with a large prime
        # part can certify f_q itself
        if ecpp_cert is None:
            try:
                ecpp_cert = _attempt_certificate(f_q, D, x, y, seed)
            except CompositeSignal:
                raise
        rm = rabin_miller(p, witness_count=config.rm_witnesses, seed=seed ^ p)
        if rm.verdict != "probable-prime":
            detail[str(p)] = "rm-composite"
            continue
        if config.hilbert_method == "crt" and -D <= 10**4:
            H = hilbert_crt(D, p)
        else:
            H = hilbert_analytic(D)
        hit = root_mod(H, p)
        if hit is None:
            last_stage = "no-root"
            detail[str(p)] = "no-root"
            continue
        found = _order_check(ctx, D, p, hit, seed)
        if found is None:
            last_stage = "wrong-order"
            detail[str(p)] = "wrong-order"
            continue
        E, P = found
        cand = Candidate(E=E, p=p, D=D, trace=p + 1 - f_q)
        return AttemptResult(
            D=D, stage="candidate", candidate=cand, point=P, x=x, y=y,
            ecpp=ecpp_cert, detail=detail,
        )
    return AttemptResult(D=D, stage=last_stage, x=x, y=y, ecpp=ecpp_cert, detail=detail)


def _order_check(ctx, D, p, hit, seed):
    """Find the curve (or twist) of order f_q and a point annihilated by it.

    For prime f_q, a point of order f_q pins the group order inside the
    Hasse interval, so the scalar check is the binding evidence.
    """
    f_q = ctx.f_q
    r = hit.value
    if hit.special:
        candidates = higher_twists(
            CurveOverPrimeRing(p, 0, 1) if r == 0 else CurveOverPrimeRing(p, 1, 0), p
        )
    else:
        E = curve_from_j(r, p)
        candidates = [E, quadratic_twist(E, smallest_nonresidue(p))]
    rng = random.Random(seed * 2654435761 + p)
    for E in candidates:
        P = _annihilated_point(E, f_q, rng)
        if P is not None:
            return E, P
    return None


def _annihilated_point(E, order, rng, tries=24):
    """A point with order*P = infinity, or None when the curve's order
    cannot be `order`.

    For odd prime `order`, every point of a curve that truly has that
    order is annihilated, so a single surviving probe settles it either
    way.  The distinguished point (1, 1) is probed first when it lies on
    the curve.
    """
    p = E.p
    probes = []
    if E.contains((1, 1)):
        probes.append((1, 1))
    while len(probes) < tries:
        x = rng.randrange(p)
        v = E.rhs(x)
        if v == 0:
            probes.append((x, 0))
        elif jacobi(v, p) == 1:
            probes.append((x, sqrt_mod(v, p)))
    for P in probes:
        try:
            if scalar_mul(order, P, E) is None:
                return P
            return None  # one non-annihilated point rules the curve out
        except AddFailure as e:
            raise CompositeSignal(p, factor=e.factor, stage="order-check")
    return None


@dataclass
class ConstructResult:
    verdict: str  # "prime-constructed" | "composite" | "inconclusive"
    certificate: dict | None = None
    reason: str = ""
    factor: int | None = None

    @property
    def exit_code(self):
        return {"prime-constructed": 0, "composite": 1}.get(self.verdict, 2)


def construct(q, config=None, seed=None):
    """Run the full construction for index q and emit a certificate."""
    config = config or PipelineConfig()
    if seed is not None:
        config = PipelineConfig(**{**config.to_dict(), "seed": seed})
    rndseed = config.seed
    try:
        ctx = FibContext.for_index(q)
    except DomainError as e:
        return ConstructResult("inconclusive", reason=f"bad index: {e}")
    f_q = ctx.f_q
    cert = {
        "schema": SCHEMA,
        "q": q,
        "f_q": str(f_q),
        "two_adic": {"e": ctx.e, "m": str(ctx.m)},
        "config": config.to_dict(),
        "config_hash": config.config_hash(),
        "seed": rndseed,
    }
    try:
        return _construct_inner(ctx, config, cert, rndseed)
    except CompositeSignal as e:
        cert["composite_witness"] = {
            "stage": e.stage,
            "factor": str(e.factor) if e.factor else None,
        }
        cert["verdict"] = "composite"
        return ConstructResult("composite", cert, reason=e.stage, factor=e.factor)
    except ResourceError as e:
        cert["verdict"] = "inconclusive"
        cert["reason"] = str(e)
        return ConstructResult("inconclusive", cert, reason=str(e))


def _construct_inner(ctx, config, cert, seed):
    f_q, q = ctx.f_q, ctx.q

    # density scan (step 1)
    if f_q > 1000:
        density = density_test(f_q)
        cert["density"] = density.to_dict()
        nonresidue = density.first_nonresidue
    else:
        cert["density"] = {"skipped": "subject below the scan threshold"}
        nonresidue = None
    if nonresidue is None:
        from .modular import find_nonresidue

        nonresidue = find_nonresidue(f_q)

    # basis primes and good discriminants (steps 2-3), adaptively widened
    bound = config.bound_start or max(int(2 * log(f_q)), 30)
    bound = max(bound, 3)
    P = residue_primes(ctx, bound)
    S = good_discriminants(P, bound)
    while not S.discs and bound < config.bound_cap:
        bound = min(2 * bound, config.bound_cap)
        P = residue_primes(ctx, bound)
        S = good_discriminants(P, bound)
    cert["P_q"] = {"bound": bound, "primes": P}
    cert["S_q"] = list(S.discs)

    # square-root precomputation (step 4)
    table = ts_precompute(f_q, nonresidue)  # CompositeSignal on failure
    cert["sqrt_table"] = {
        "nonresidue": nonresidue,
        "e": table.e,
        "m": str(table.m),
        "generator": str(table.g),
    }

    # Cassini square root of -1 (step 5); also seeds the sqrt cache
    s = cassini_sqrt_minus_one(ctx)  # CompositeSignal on failure
    cert["cassini"] = {"sqrt_minus_one": str(s)}

    # exceptional cases (step 6)
    exc = exceptional_cases_test(ctx, seed=seed)
    cert["exceptional"] = exc.to_dict()
    if exc.verdict == "composite":
        raise CompositeSignal(f_q, stage="exceptional-cases")
    confirmed = exc.verdict == "prime"
    fq_ecpp = exc.certificate

    sqrt_cache = _SqrtCache(ctx, table, s)
    transcript = []
    candidates = []
    chosen_attempt = None
    # per the Lemma 5.6 cost model, only discriminants that pass the norm
    # equation count as loop iterations; symbol screening is cheap
    iterations = 0
    screened = 0
    discs = list(S.discs)
    index = 0
    while index < len(discs):
        D = discs[index]
        index += 1
        screened += 1
        if screened > config.max_screened:
            cert["transcript"] = transcript
            raise ResourceError("discriminant screening cap reached")
        res = attempt_discriminant(ctx, D, sqrt_cache, config, seed)
        entry = {"D": D, "stage": res.stage}
        if res.x:
            entry["x"] = str(res.x)
            entry["y"] = str(res.y)
        if res.detail:
            entry["detail"] = res.detail
        transcript.append(entry)
        if res.stage != "cornacchia":
            iterations += 1
            if iterations > config.max_iterations:
                cert["transcript"] = transcript
                raise ResourceError("discriminant iteration cap reached")
        if res.ecpp is not None and fq_ecpp is None:
            fq_ecpp = res.ecpp
            confirmed = True
        if res.stage == "candidate":
            candidates.append(res)
            if confirmed:
                chosen_attempt = res
                break
        # adaptive widening when the list is exhausted without a candidate
        if index == len(discs) and not candidates and bound < config.bound_cap:
            bound = min(2 * bound, config.bound_cap)
            P = residue_primes(ctx, bound)
            S = good_discriminants(P, bound)
            new = [d for d in S.discs if d not in discs]
            discs.extend(new)
            cert["P_q"] = {"bound": bound, "primes": P}
            cert["S_q"] = list(S.discs)

    cert["transcript"] = transcript
    cert["iterations"] = iterations
    cert["screened"] = screened
    cert["bounds"] = {
        "elkies_pass": round(verification_prime_bound(f_q), 3),
        "modular_precompute": round(modular_precompute_bound(f_q), 3),
    }

    if not candidates:
        cert["verdict"] = "likely composite"
        # the verification passes run on the empty list by construction
        cert["verification"] = {"elkies": [], "eigenvalue": [], "survivors": 0}
        return ConstructResult(
            "inconclusive", cert, reason="no discriminant produced a curve"
        )

    # verification passes (steps 18-19) on all collected candidates
    cands = [r.candidate for r in candidates]
    survivors, elkies_log = elkies_verification_pass(cands)
    survivors, eigen_log = eigenvalue_verification_pass(survivors)
    cert["verification"] = {
        "elkies": [list(map(str, row)) for row in elkies_log],
        "eigenvalue": [list(map(str, row)) for row in eigen_log],
        "survivors": len(survivors),
    }
    if not survivors:
        cert["verdict"] = "likely composite"
        return ConstructResult(
            "inconclusive", cert, reason="verification passes removed all candidates"
        )

    if chosen_attempt is not None and chosen_attempt.candidate in survivors:
        pick = chosen_attempt
    else:
        rng = random.Random(seed ^ 0xC0FFEE)
        surviving_attempts = [r for r in candidates if r.candidate in survivors]
        pick = surviving_attempts[rng.randrange(len(surviving_attempts))]

    cand = pick.candidate
    E, p = cand.E, cand.p
    order_proof = {"scalar_annihilation": True}
    if p < 10**6:
        order_proof["method"] = "exhaustive"
        order_proof["count"] = str(order_exhaustive(E))
    else:
        order_proof["method"] = "bsgs"
        order_proof["count"] = str(order_bsgs(E, seed=seed or 1))
    if int(order_proof["count"]) != f_q:
        raise CompositeSignal(f_q, stage="order-evidence-mismatch")
    cert["chosen"] = {
        "D": cand.D,
        "x": str(pick.x),
        "y": str(pick.y),
        "p": str(p),
        "curve": {"a": str(E.a), "b": str(E.b)},
        "point": [str(pick.point[0]), str(pick.point[1])],
        "trace": str(cand.trace),
        "order": str(ctx.f_q),
        "order_proof": order_proof,
        "witnesses": [
            {"ell": w.ell, "t_mod": w.t_mod, "method": w.method}
            for w in cand.witnesses
        ],
    }
    cert["ecpp"] = fq_ecpp.to_dict() if fq_ecpp else None
    rm_p = rabin_miller(p, witness_count=config.rm_witnesses, seed=seed ^ p)
    cert["rm_p"] = rm_p.to_dict()
    cert["verdict"] = "prime-constructed" if confirmed else "probable-prime-curve"
    if not confirmed:
        # every discriminant walked without an ECPP confirmation
        return ConstructResult("inconclusive", cert, reason="no ECPP confirmation")
    return ConstructResult("prime-constructed", cert)


def canonical_json(cert):
    return json.dumps(cert, sort_keys=True, separators=(",", ":")) + "\n"


@dataclass(frozen=True)
class VerifyOutcome:
    accepted: bool
    reason: str = ""

    @property
    def exit_code(self):
        return 0 if self.accepted else 1


def verify_certificate(cert):
    """Re-run the cheap checks of a construction certificate."""
    if isinstance(cert, (str, bytes)):
        cert = json.loads(cert)
    if cert.get("schema") != SCHEMA:
        return VerifyOutcome(False, "schema")
    if cert.get("verdict") != "prime-constructed":
        return VerifyOutcome(False, "verdict")
    try:
        q = int(cert["q"])
        f_q = int(cert["f_q"])
        chosen = cert["chosen"]
        D = int(chosen["D"])
        x, y = int(chosen["x"]), int(chosen["y"])
        p = int(chosen["p"])
        a, b = int(chosen["curve"]["a"]), int(chosen["curve"]["b"])
        P = (int(chosen["point"][0]), int(chosen["point"][1]))
        trace = int(chosen["trace"])
    except (KeyError, ValueError, TypeError):
        return VerifyOutcome(False, "malformed")
    from .fib import fib

    if fib(q) != f_q:
        return VerifyOutcome(False, "fibonacci-index")
    if 4 * f_q != x * x + (-D) * y * y:
        return VerifyOutcome(False, "norm-equation")
    if p not in (f_q + 1 - x, f_q + 1 + x):
        return VerifyOutcome(False, "field-prime")
    if trace != p + 1 - f_q:
        return VerifyOutcome(False, "trace")
    if trace * trace > 4 * p:
        return VerifyOutcome(False, "hasse")
    try:
        E = CurveOverPrimeRing(p, a, b)
    except DomainError:
        return VerifyOutcome(False, "singular-curve")
    if not E.contains(P):
        return VerifyOutcome(False, "point-membership")
    try:
        if scalar_mul(f_q, P, E) is not None:
            return VerifyOutcome(False, "order-evidence")
        if scalar_mul(1, P, E) is None:
            return VerifyOutcome(False, "order-evidence")
    except AddFailure:
        return VerifyOutcome(False, "order-evidence")
    for w in chosen.get("witnesses", []):
        if int(w["t_mod"]) != trace % int(w["ell"]):
            return VerifyOutcome(False, "trace-congruence")
    chain = cert.get("ecpp")
    if chain is None:
        return VerifyOutcome(False, "missing-ecpp")
    try:
        link = EcppCertificate.from_dict(chain)
    except (KeyError, ValueError, TypeError):
        return VerifyOutcome(False, "malformed-ecpp")
    if link.N != f_q:
        return VerifyOutcome(False, "ecpp-subject")
    out = ecpp_check(link)
    if out.verdict != "verified":
        return VerifyOutcome(False, f"ecpp:{out.reason}")
    return VerifyOutcome(True)


def run_verification_passes(cert):
    """Re-run the modular-polynomial and eigenvalue passes on a
    certificate's chosen candidate (the `verify` subcommand)."""
    if isinstance(cert, (str, bytes)):
        cert = json.loads(cert)
    try:
        chosen = cert["chosen"]
        p = int(chosen["p"])
        E = CurveOverPrimeRing(p, int(chosen["curve"]["a"]), int(chosen["curve"]["b"]))
        cand = Candidate(E=E, p=p, D=int(chosen["D"]), trace=int(chosen["trace"]))
    except (KeyError, ValueError, TypeError, DomainError) as e:
        return {"survived": False, "error": f"malformed certificate: {e}"}
    survivors, elkies_log = elkies_verification_pass([cand])
    eigen_log = []
    if survivors:
        survivors, eigen_log = eigenvalue_verification_pass(survivors)
    return {
        "survived": bool(survivors),
        "elkies": [list(map(str, row)) for row in elkies_log],
        "eigenvalue": [list(map(str, row)) for row in eigen_log],
        "witnesses": [
            {"ell": w.ell, "t_mod": w.t_mod, "method": w.method}
            for c in survivors
            for w in c.witnesses
        ],
    }


def check_index(q, seed=0):
    """Primality stack only (no curve search): the `check` subcommand."""
    report = {"q": q}
    try:
        ctx = FibContext.for_index(q)
    except DomainError as e:
        return "inconclusive", {"q": q, "error": str(e)}
    f_q = ctx.f_q
    report["f_q"] = str(f_q)
    stages = []
    try:
        if f_q > 1000:
            d = density_test(f_q)
            stages.append({"stage": "density", "verdict": d.verdict})
        rm = rabin_miller(f_q, seed=seed)
        stages.append({"stage": "rabin-miller", "verdict": rm.verdict,
                       "witness": rm.witness})
        if rm.verdict == "composite":
            report["stages"] = stages
            report["verdict"] = "composite"
            report["failing_stage"] = "rabin-miller"
            return "composite", report
        s = cassini_sqrt_minus_one(ctx)
        stages.append({"stage": "cassini", "sqrt_minus_one": str(s)})
        exc = exceptional_cases_test(ctx, seed=seed)
        stages.append({"stage": "exceptional", "verdict": exc.verdict})
        report["stages"] = stages
        report["ecpp"] = exc.certificate.to_dict() if exc.certificate else None
        if exc.verdict == "composite":
            report["verdict"] = "composite"
            report["failing_stage"] = "exceptional"
            return "composite", report
        report["verdict"] = "prime" if exc.verdict == "prime" else "probable prime"
        return report["verdict"], report
    except CompositeSignal as e:
        stages.append({"stage": e.stage, "verdict": "composite",
                       "factor": str(e.factor) if e.factor else None})
        report["stages"] = stages
        report["verdict"] = "composite"
        report["failing_stage"] = e.stage
        return "composite", report
