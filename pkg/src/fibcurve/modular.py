"""Jacobi symbols, modular square roots in all residue classes, Cornacchia.

Square roots are canonicalized to the smaller of the two representatives
so every caller sees reproducible output.  All square-root paths report
CompositeSignal instead of returning garbage when the modulus fails to
behave like a prime; the construction pipeline relies on that.
"""

from dataclasses import dataclass, field
from math import gcd, isqrt

from .errors import CompositeSignal, DomainError, NotASquare

# Beyond this 2-Sylow size the precomputed root table would be large for
# no benefit; fall back to classic per-query Tonelli-Shanks.
TABLE_SYLOW_CAP = 1 << 16


def jacobi(a, n):
    """Jacobi symbol (a | n) for odd n >= 3."""
    if n < 3 or n % 2 == 0:
        raise DomainError("Jacobi symbol needs an odd modulus >= 3")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _canonical(x, p):
    return min(x % p, (p - x) % p)


def sqrt_mod_3mod4(a, p):
    """Square root mod p = 3 (mod 4): a^((p+1)/4)."""
    a %= p
    if jacobi(a, p) != 1:
        raise NotASquare(f"{a} is not a square mod {p}")
    x = pow(a, (p + 1) // 4, p)
    if x * x % p != a:
        raise CompositeSignal(p, stage="sqrt-3mod4")
    return _canonical(x, p)


def sqrt_mod_5mod8(a, p):
    """Square root mod p = 5 (mod 8), two-branch Atkin form."""
    a %= p
    if jacobi(a, p) != 1:
        raise NotASquare(f"{a} is not a square mod {p}")
    if pow(a, (p - 1) // 4, p) == 1:
        x = pow(a, (p + 3) // 8, p)
    else:
        x = 2 * a * pow(4 * a % p, (p - 5) // 8, p) % p
    if x * x % p != a:
        raise CompositeSignal(p, stage="sqrt-5mod8")
    return _canonical(x, p)


@dataclass
class SqrtTable:
    """Precomputed square roots over the 2-Sylow subgroup of (Z/pZ)^x.

    g generates the 2-Sylow subgroup (order 2^e, p - 1 = 2^e * m).  roots
    maps each even power g^(2i) to the root g^i.  entries keeps the
    ordered (g^i, root) pairs for inspection.
    """

    p: int
    g: int
    e: int
    m: int
    roots: dict = field(repr=False)
    entries: list = field(repr=False)


def ts_precompute(p, n):
    """Build the 2-Sylow square-root table from a non-residue n.

    Raises CompositeSignal if g^(2^(e-1)) != -1, which cannot happen for
    prime p.
    """
    if jacobi(n, p) != -1:
        raise DomainError("n must be a quadratic non-residue mod p")
    e, m = 0, p - 1
    while m % 2 == 0:
        m //= 2
        e += 1
    g = pow(n, m, p)
    if pow(g, 1 << (e - 1), p) != p - 1:
        raise CompositeSignal(p, stage="sylow-generator")
    if (1 << e) > TABLE_SYLOW_CAP:
        return SqrtTable(p=p, g=g, e=e, m=m, roots=None, entries=[])
    roots = {}
    entries = []
    power = 1
    for i in range(1 << e):
        if i % 2 == 0:
            root = pow(g, i // 2, p)
            roots[power] = root
            entries.append((power, root))
        power = power * g % p
    return SqrtTable(p=p, g=g, e=e, m=m, roots=roots, entries=entries)


def ts_sqrt(a, table):
    """Square root of a via the precomputed table (a must be a residue)."""
    p = table.p
    a %= p
    x = pow(a, (table.m + 1) // 2, p)
    y = pow(a, table.m, p)
    if table.roots is None:
        return _ts_classic(a, table)
    z = table.roots.get(y)
    if z is None:
        raise CompositeSignal(p, stage="sylow-lookup")
    r = x * pow(z, -1, p) % p
    if r * r % p != a:
        raise CompositeSignal(p, stage="sqrt-table")
    return _canonical(r, p)


def _ts_classic(a, table):
    # Per-query Tonelli-Shanks for adversarially large 2-Sylow subgroups.
    p, e = table.p, table.e
    x = pow(a, (table.m + 1) // 2, p)
    b = pow(a, table.m, p)
    g = table.g
    r = e
    while b != 1:
        t, k = b, 0
        while t != 1:
            t = t * t % p
            k += 1
            if k == r:
                raise CompositeSignal(p, stage="sqrt-classic")
        gs = pow(g, 1 << (r - k - 1), p)
        g = gs * gs % p
        x = x * gs % p
        b = b * g % p
        r = k
    if x * x % p != a % p:
        raise CompositeSignal(p, stage="sqrt-classic")
    return _canonical(x, p)


def find_nonresidue(p, start=2):
    """Smallest prime quadratic non-residue >= start."""
    n = start
    while True:
        if _is_probable_small_prime(n) and jacobi(n, p) == -1:
            return n
        n += 1
        if n > p:
            raise CompositeSignal(p, stage="nonresidue-scan")


def _is_probable_small_prime(n):
    if n < 2:
        return False
    for d in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % d == 0:
            return n == d
        if d * d > n:
            return True
    # callers only scan small n; trial division suffices
    d = 41
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def sqrt_mod(a, p, table=None):
    """Square root of a mod odd probable prime p, dispatching on p mod 8."""
    if p < 3 or p % 2 == 0:
        raise DomainError("modulus must be an odd number >= 3")
    a %= p
    if a == 0:
        return 0
    if jacobi(a, p) != 1:
        raise NotASquare(f"{a} is not a square mod {p}")
    if p % 4 == 3:
        return sqrt_mod_3mod4(a, p)
    if p % 8 == 5:
        return sqrt_mod_5mod8(a, p)
    if table is None:
        table = ts_precompute(p, find_nonresidue(p))
    return ts_sqrt(a, table)


def is_perfect_square(n):
    if n < 0:
        return False
    r = isqrt(n)
    return r * r == n


@dataclass(frozen=True)
class NoSolution:
    reason: str = ""

    def __bool__(self):
        return False


def _sqrt_classes_mod(d, m, factor_bound=10**7):
    """All canonical (<= m/2) square roots of -d modulo m.

    m is factored by trial division (desk scale).  Prime-power roots are
    Hensel lifts; moduli this routine cannot handle yield no classes, and
    cornacchia then reports NoSolution rather than guessing.
    """
    target = (-d) % m
    if m <= factor_bound:
        fac = _trial_factor(m)
    else:
        return []
    residues = [(0, 1)]
    for p, k in fac:
        pk = p**k
        local = _sqrt_mod_prime_power(target % pk, p, k)
        if not local:
            return []
        new = []
        for r0, m0 in residues:
            for r1 in local:
                new.append((_crt(r0, m0, r1, pk), m0 * pk))
        residues = new
    out = sorted({min(r % m, (m - r) % m) for r, _ in residues})
    return [r for r in out if r * r % m == target]


def _trial_factor(n):
    fac = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            k = 0
            while n % d == 0:
                n //= d
                k += 1
            fac.append((d, k))
        d += 1 if d == 2 else 2
    if n > 1:
        fac.append((n, 1))
    return fac


def _crt(r0, m0, r1, m1):
    t = (r1 - r0) * pow(m0, -1, m1) % m1
    return r0 + m0 * t


def _sqrt_mod_prime_power(a, p, k):
    """All square roots of a modulo p^k (may be empty)."""
    pk = p**k
    a %= pk
    if a == 0:
        # roots are multiples of p^ceil(k/2)
        step = p ** ((k + 1) // 2)
        return list(range(0, pk, step))
    if p == 2:
        return [x for x in range(pk) if x * x % pk == a]
    v = 0
    rem = a
    while rem % p == 0:
        rem //= p
        v += 1
    if v % 2 == 1:
        return []
    if v:
        base = _sqrt_mod_prime_power(rem, p, k - v)
        half = v // 2
        out = set()
        for r in base:
            for j in range(p**half):
                cand = (r + j * p ** (k - v)) * p**half % pk
                if cand * cand % pk == a:
                    out.add(cand)
        return sorted(out)
    if jacobi(rem % p, p) != 1:
        return []
    r = sqrt_mod(rem % p, p)
    # Hensel lift to p^k
    mod = p
    while mod < pk:
        mod = min(mod * mod, pk)
        f = (r * r - a) % mod
        r = (r - f * pow(2 * r, -1, mod)) % mod
    return sorted({r % pk, (pk - r) % pk})


def _descend(d, m, r0):
    """Euclidean descent phase of Cornacchia from an admissible root r0."""
    limit = isqrt(m)
    prev, cur = m, r0
    while cur > limit:
        prev, cur = cur, prev % cur
        if cur == 0:
            return None
    if cur == 0:
        return None
    rem = m - cur * cur
    if rem % d:
        return None
    s = rem // d
    if not is_perfect_square(s):
        return None
    return (cur, isqrt(s))


def cornacchia(d, m, root_hint=None):
    """Positive primitive solution (x, y) of x^2 + d*y^2 = m, or NoSolution.

    Every square-root class of -d mod m is tried (they correspond to the
    distinct primitive representations); the solution with smallest x wins.
    root_hint supplies a known square root of -d mod m for moduli whose
    factorization is not available, e.g. 4*f_q in the pipeline.
    """
    if d < 1 or m <= d:
        raise DomainError("need 1 <= d < m")
    if m % 2 == 1 and jacobi((-d) % m if (-d) % m else 1, m) == -1:
        return NoSolution("(-d|m) = -1")
    roots = []
    if root_hint is not None:
        r = root_hint % m
        r = min(r, m - r)
        if r * r % m == (-d) % m:
            roots.append(r)
    if not roots:
        roots = _sqrt_classes_mod(d, m)
    if not roots:
        return NoSolution("no square root of -d mod m found")
    best = None
    for r0 in roots:
        hit = _descend(d, m, r0)
        if hit is None:
            continue
        x, y = hit
        if x > 0 and y > 0 and gcd(x, y) == 1:
            if best is None or x < best[0]:
                best = (x, y)
    if best is None:
        return NoSolution("descent found no primitive solution")
    return best
