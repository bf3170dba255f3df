"""Fibonacci numbers, residue arithmetic, Pisano periods, and related predicates.

The pipeline's subject is a Fibonacci number f_q with prime index q > 3.
Everything here is exact integer arithmetic; no floating point.
"""

from dataclasses import dataclass, field

from .errors import CompositeSignal, DomainError


def fib_pair(n):
    """Return (f_n, f_{n+1}) by fast doubling."""
    if n == 0:
        return (0, 1)
    a, b = fib_pair(n >> 1)
    c = a * (2 * b - a)
    d = a * a + b * b
    if n & 1:
        return (d, c + d)
    return (c, d)


def fib(n):
    """The n-th Fibonacci number (f_0 = 0, f_1 = 1)."""
    if n < 0:
        raise DomainError("index must be non-negative")
    return fib_pair(n)[0]


def fib_matrix(n):
    """Oracle for fib: power of the [[1,1],[1,0]] step matrix."""
    m = (1, 1, 1, 0)
    r = (1, 0, 0, 1)
    while n:
        if n & 1:
            r = _mat2_mul(r, m)
        m = _mat2_mul(m, m)
        n >>= 1
    return r[1]


def _mat2_mul(x, y):
    return (
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    )


def fib_pair_mod(n, modulus):
    """(f_n mod m, f_{n+1} mod m) by fast doubling in the residue ring."""
    if modulus < 2:
        raise DomainError("modulus must be >= 2")
    a, b = 0, 1
    for bit in bin(n)[2:] if n > 0 else "":
        c = a * (2 * b - a) % modulus
        d = (a * a + b * b) % modulus
        if bit == "1":
            a, b = d, (c + d) % modulus
        else:
            a, b = c, d
    return (a % modulus, b % modulus)


def fib_mod(n, modulus):
    return fib_pair_mod(n, modulus)[0]


def pisano_period(m):
    """Least pi > 0 with f_pi = 0 and f_{pi+1} = 1 (mod m)."""
    if m < 2:
        raise DomainError("modulus must be >= 2")
    a, b = 1, 1  # (f_1, f_2)
    n = 1
    while not (a == 0 and b == 1):
        a, b = b, (a + b) % m
        n += 1
    return n


@dataclass(frozen=True)
class FibContext:
    """Index q plus f_q and the 2-adic split f_q - 1 = 2^e * m (m odd)."""

    q: int
    f_q: int = field(repr=False)
    e: int
    m: int = field(repr=False)

    @classmethod
    def for_index(cls, q):
        if q <= 3 or not _is_small_prime(q):
            raise DomainError("pipeline index must be an odd prime > 3")
        f = fib(q)
        e, m = _two_adic_split(f - 1)
        return cls(q=q, f_q=f, e=e, m=m)


def _two_adic_split(n):
    e = 0
    while n % 2 == 0:
        n //= 2
        e += 1
    return e, n


def _is_small_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def legendre_fib(ell, ctx):
    """Legendre symbol (f_q | ell) for odd prime ell, via Pisano reduction.

    The full integer f_q is never reduced directly; the index is reduced
    modulo the Pisano period of ell first.
    """
    from .modular import jacobi

    if ell == 2 or not _is_small_prime(ell):
        raise DomainError("ell must be an odd prime")
    pi = pisano_period(ell)
    r = ctx.q % pi
    residue = fib_mod(r, ell)
    if residue == 0:
        return 0
    return jacobi(residue, ell)


def cassini_sqrt_minus_one(ctx):
    """Square root of -1 mod f_q from the ratio f_{(q+1)/2} / f_{(q-1)/2}.

    Returns the residue s with s^2 = -1 (mod f_q).  Raises CompositeSignal
    when the ratio is undefined or fails to square to -1; either outcome
    proves f_q composite.
    """
    f = ctx.f_q
    lo, hi = fib_pair_mod((ctx.q - 1) // 2, f)
    # lo = f_{(q-1)/2}, hi = f_{(q+1)/2}
    from math import gcd

    g = gcd(lo, f)
    if g != 1:
        raise CompositeSignal(ctx.f_q, factor=g, stage="cassini-inverse")
    s = hi * pow(lo, -1, f) % f
    if s * s % f != f - 1:
        raise CompositeSignal(ctx.f_q, stage="cassini-square")
    return s


def binet_check_mod(n, p):
    """Check the closed-form Fibonacci formula against f_n in F_p.

    Requires 5 to be a quadratic residue mod p so that the golden-ratio
    roots of X^2 - X - 1 live in F_p.
    """
    from .modular import jacobi, sqrt_mod

    if p == 5 or jacobi(5, p) != 1:
        raise DomainError("5 must be a quadratic residue mod p")
    root5 = sqrt_mod(5 % p, p)
    inv2 = pow(2, -1, p)
    alpha = (1 + root5) * inv2 % p
    beta = (1 - root5) * inv2 % p
    lhs = (pow(alpha, n, p) - pow(beta, n, p)) * pow(root5, -1, p) % p
    return lhs == fib_mod(n, p)
