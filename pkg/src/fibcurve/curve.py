"""Short-Weierstrass curves over Z/pZ with ring (not field) semantics.

Point addition inverts denominators with an explicit gcd check: over a
composite modulus a non-invertible denominator exposes a factor, and the
primality stack treats that as evidence rather than as an error.  The
point at infinity is represented by None.
"""

from dataclasses import dataclass
from math import gcd, isqrt

from .errors import DomainError, ResourceError
from .modular import jacobi

ORDER_EXHAUSTIVE_BOUND = 10**7
ORDER_BSGS_BOUND = 10**13


class AddFailure(Exception):
    """Denominator not invertible mod p; witness exposes gcd(witness, p)."""

    def __init__(self, witness, modulus):
        self.witness = witness % modulus
        self.modulus = modulus
        self.factor = gcd(self.witness, modulus)
        super().__init__(
            f"non-invertible denominator {self.witness} mod {modulus}"
            f" (gcd {self.factor})"
        )


@dataclass(frozen=True)
class CurveOverPrimeRing:
    """Y^2 = X^3 + a*X + b over Z/pZ, p odd > 3, nonsingular."""

    p: int
    a: int
    b: int

    def __post_init__(self):
        if self.p <= 3 or self.p % 2 == 0:
            raise DomainError("modulus must be odd and > 3")
        disc = -16 * (4 * self.a**3 + 27 * self.b**2) % self.p
        if gcd(disc, self.p) != 1:
            raise DomainError("curve is singular over this ring")

    def contains(self, point):
        if point is None:
            return True
        x, y = point
        return (y * y - (x * x * x + self.a * x + self.b)) % self.p == 0

    def rhs(self, x):
        return (x * x * x + self.a * x + self.b) % self.p

    def j_invariant(self):
        p = self.p
        num = 1728 * 4 * pow(self.a, 3, p) % p
        den = (4 * pow(self.a, 3, p) + 27 * pow(self.b, 2, p)) % p
        return num * _inv(den, p) % p


def _inv(u, p):
    u %= p
    g = gcd(u, p)
    if g != 1:
        raise AddFailure(u, p)
    return pow(u, -1, p)


def curve_from_j(r, p):
    """Curve with j-invariant r: Y^2 = X^3 + aX - a, a = 27r/(4(1728-r)).

    The special values use the standard models: r = 0 gives Y^2 = X^3 + 1
    and r = 1728 gives Y^2 = X^3 + X.
    """
    r %= p
    if r == 0:
        return CurveOverPrimeRing(p, 0, 1)
    if r == 1728 % p:
        return CurveOverPrimeRing(p, 1, 0)
    a = 27 * r * _inv(4 * (1728 - r) % p, p) % p
    return CurveOverPrimeRing(p, a, -a % p)


def negate(P, E):
    if P is None:
        return None
    return (P[0], (-P[1]) % E.p)


def add(P, Q, E):
    """Chord-tangent addition; raises AddFailure on non-invertible slopes."""
    p = E.p
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if (x1 - x2) % p == 0:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + E.a) * _inv(2 * y1, p) % p
    else:
        lam = (y2 - y1) * _inv(x2 - x1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    y3 = (lam * (x1 - x3) - y1) % p
    return (x3, y3)


def scalar_mul(k, P, E):
    """k*P by double-and-add; AddFailure propagates."""
    if k < 0:
        return scalar_mul(-k, negate(P, E), E)
    R = None
    Q = P
    while k:
        if k & 1:
            R = add(R, Q, E)
        Q = add(Q, Q, E)
        k >>= 1
    return R


def quadratic_twist(E, g):
    """Twist by the non-residue g: (a, b) -> (g^2 a, g^3 b)."""
    if jacobi(g, E.p) != -1:
        raise DomainError("twisting element must be a non-residue")
    p = E.p
    return CurveOverPrimeRing(p, g * g * E.a % p, g * g * g * E.b % p)


def smallest_nonresidue(p):
    n = 2
    while jacobi(n, p) != -1:
        n += 1
    return n


def _primitive_root(p):
    order = p - 1
    ps = []
    n = order
    d = 2
    while d * d <= n:
        if n % d == 0:
            ps.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        ps.append(n)
    g = 2
    while True:
        if all(pow(g, order // q, p) != 1 for q in ps):
            return g
        g += 1


def higher_twists(E, p=None):
    """Twist family for the special invariants j = 0 and j = 1728.

    Returns one curve per coset of (F_p^x)/(F_p^x)^6 (j = 0, models
    Y^2 = X^3 + c) or (F_p^x)/(F_p^x)^4 (j = 1728, models Y^2 = X^3 + cX).
    Fewer than 6 (resp. 4) classes exist when p is not 1 mod 3 (resp. 4);
    the shorter list is the supersingular-regime flag.
    """
    p = p or E.p
    j = E.j_invariant()
    if j == 0:
        count, make = 6, lambda c: CurveOverPrimeRing(p, 0, c)
    elif j == 1728 % p:
        count, make = 4, lambda c: CurveOverPrimeRing(p, c, 0)
    else:
        raise DomainError("higher twists only apply to j = 0 or 1728")
    g = _primitive_root(p)
    classes = gcd(count, p - 1)
    reps = [pow(g, i, p) for i in range(classes)]
    return [make(c) for c in reps]


def order_exhaustive(E):
    """Exact order by character sum; ground-truth oracle for p <= 10^7."""
    p = E.p
    if p > ORDER_EXHAUSTIVE_BOUND:
        raise ResourceError("p exceeds exhaustive-count bound")
    square = bytearray(p)
    for x in range(p):
        square[x * x % p] = 1
    a, b = E.a % p, E.b % p
    count = 1  # infinity
    for x in range(p):
        v = (x * x * x + a * x + b) % p
        if v == 0:
            count += 1
        elif square[v]:
            count += 2
    return count


def _random_point(E, rng):
    p = E.p
    while True:
        x = rng.randrange(p)
        v = E.rhs(x)
        if v == 0:
            return (x, 0)
        if jacobi(v, p) == 1:
            from .modular import sqrt_mod

            return (x, sqrt_mod(v, p))


def _point_order_multiple(P, E):
    """Some N in the Hasse interval with N*P = infinity, via BSGS."""
    p = E.p
    w = isqrt(4 * p) + 1
    m = isqrt(w) + 1
    baby = {}
    Q = None
    for j in range(m + 1):
        if Q is not None:
            baby.setdefault(Q[0], (j, Q[1]))
        elif j > 0:
            return j  # j*P hit infinity early: tiny order
        Q = add(Q, P, E)
    base = scalar_mul(p + 1, P, E)
    stride = scalar_mul(2 * m + 1, P, E)
    R = base
    for i in range(0, m + 2):
        # test (p+1) + i*(2m+1) = +-j
        if R is None:
            N = p + 1 + i * (2 * m + 1)
            if N > 0:
                return N
        else:
            hit = baby.get(R[0])
            if hit is not None:
                j, yj = hit
                sign = -1 if (R[1] - yj) % p == 0 else 1
                N = p + 1 + i * (2 * m + 1) + sign * j
                if N > 0 and scalar_mul(N, P, E) is None:
                    return N
        R = add(R, stride, E)
    # stride downward as well
    R = base
    neg = negate(stride, E)
    for i in range(0, m + 2):
        if R is None:
            N = p + 1 - i * (2 * m + 1)
            if N > 0:
                return N
        else:
            hit = baby.get(R[0])
            if hit is not None:
                j, yj = hit
                sign = -1 if (R[1] - yj) % p == 0 else 1
                N = p + 1 - i * (2 * m + 1) + sign * j
                if N > 0 and scalar_mul(N, P, E) is None:
                    return N
        R = add(R, neg, E)
    raise DomainError("no annihilator found in the Hasse interval")


def _trial_factor(n):
    fac = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            fac[d] = fac.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        fac[n] = fac.get(n, 0) + 1
    return fac


def point_order(P, E):
    N = _point_order_multiple(P, E)
    for q in _trial_factor(N):
        while N % q == 0 and scalar_mul(N // q, P, E) is None:
            N //= q
    return N


def order_bsgs(E, seed=0, max_points=30):
    """Group order via point orders and the Hasse interval.

    Accumulates the lcm of sampled point orders until a unique multiple
    lies in the interval; falls back to the quadratic twist before
    giving up on a persistently ambiguous exponent.
    """
    import random

    p = E.p
    if p > ORDER_BSGS_BOUND:
        raise ResourceError("p exceeds BSGS bound")
    w = isqrt(4 * p)
    lo = p + 1 - w
    hi = p + 1 + w
    rng = random.Random(seed or 0xF1B)
    L = 1
    for _ in range(max_points):
        P = _random_point(E, rng)
        L = L * point_order(P, E) // gcd(L, point_order(P, E))
        first = (lo + L - 1) // L * L
        candidates = list(range(first, hi + 1, L))
        if len(candidates) == 1:
            return candidates[0]
    # Mestre-style fallback through the twist
    g = smallest_nonresidue(p)
    tw = quadratic_twist(E, g)
    L_tw = 1
    for _ in range(max_points):
        P = _random_point(tw, rng)
        L_tw = L_tw * point_order(P, tw) // gcd(L_tw, point_order(P, tw))
        first = (lo + L_tw - 1) // L_tw * L_tw
        candidates = list(range(first, hi + 1, L_tw))
        if len(candidates) == 1:
            return 2 * p + 2 - candidates[0]
    raise ResourceError("order remained ambiguous; group exponent too small")
