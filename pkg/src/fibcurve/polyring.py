"""Dense univariate polynomial arithmetic over Z/pZ.

Polynomials are lists of coefficients in ascending degree order with no
trailing zeros.  The modulus is passed explicitly; degrees stay small
(below ~100) everywhere this is used, so schoolbook multiplication is
the right tool.
"""

import random
from math import gcd

from .errors import CompositeSignal


def trim(f):
    while f and f[-1] == 0:
        f.pop()
    return f


def pzero():
    return []


def pone():
    return [1]


def pX():
    return [0, 1]


def deg(f):
    return len(f) - 1


def padd(f, g, p):
    n = max(len(f), len(g))
    out = [0] * n
    for i, c in enumerate(f):
        out[i] = c
    for i, c in enumerate(g):
        out[i] = (out[i] + c) % p
    for i in range(len(f)):
        out[i] %= p
    return trim(out)


def psub(f, g, p):
    n = max(len(f), len(g))
    out = [0] * n
    for i, c in enumerate(f):
        out[i] = c
    for i, c in enumerate(g):
        out[i] = out[i] - c
    return trim([c % p for c in out])


def pscale(f, s, p):
    s %= p
    return trim([c * s % p for c in f])


def pmul(f, g, p):
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return trim([c % p for c in out])


def _lead_inv(f, p):
    lc = f[-1] % p
    g = gcd(lc, p)
    if g != 1:
        raise CompositeSignal(p, factor=g, stage="poly-lead-inverse")
    return pow(lc, -1, p)


def pdivmod(f, g, p):
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    f = [c % p for c in f]
    inv = _lead_inv(g, p)
    dg = len(g) - 1
    q = [0] * max(len(f) - dg, 0)
    r = list(f)
    while len(r) - 1 >= dg and trim(r):
        if not r:
            break
        c = r[-1] * inv % p
        k = len(r) - 1 - dg
        q[k] = c
        for i, b in enumerate(g):
            r[i + k] = (r[i + k] - c * b) % p
        trim(r)
    return trim(q), trim(r)


def pmod(f, g, p):
    return pdivmod(f, g, p)[1]


def monic(f, p):
    if not f:
        return f
    inv = _lead_inv(f, p)
    return [c * inv % p for c in f]


def pgcd(f, g, p):
    a, b = [c % p for c in f], [c % p for c in g]
    trim(a), trim(b)
    while b:
        a, b = b, pmod(a, b, p)
    return monic(a, p)


def ppowmod(base, e, mod_poly, p):
    """base^e mod (mod_poly, p) by square and multiply."""
    result = [1]
    base = pmod(base, mod_poly, p)
    while e:
        if e & 1:
            result = pmod(pmul(result, base, p), mod_poly, p)
        base = pmod(pmul(base, base, p), mod_poly, p)
        e >>= 1
    return result


def peval(f, x, p):
    acc = 0
    for c in reversed(f):
        acc = (acc * x + c) % p
    return acc


def pderiv(f, p):
    return trim([c * i % p for i, c in enumerate(f)][1:])


def squarefree_part(f, p):
    d = pderiv(f, p)
    if not d:
        return monic(f, p)
    g = pgcd(f, d, p)
    return pdivmod(monic(f, p), g, p)[0]


def roots(f, p, rng=None):
    """All roots of f in F_p (each once), via X^p - X splitting."""
    rng = rng or random.Random(2897)
    f = monic([c % p for c in f], p)
    if not f:
        raise ZeroDivisionError("zero polynomial")
    out = []
    if f[0] == 0:
        out.append(0)
        while f and f[0] == 0:
            f = f[1:]
    f = squarefree_part(f, p)
    xp = ppowmod(pX(), p, f, p)
    linear = pgcd(psub(xp, pX(), p), f, p)
    out.extend(_split_linear(linear, p, rng))
    return sorted(set(out))


def _split_linear(f, p, rng):
    """Roots of a product of distinct linear factors."""
    n = deg(f)
    if n <= 0:
        return []
    if n == 1:
        return [(-f[0]) * pow(f[1], -1, p) % p]
    while True:
        delta = rng.randrange(p)
        shifted = [(f_c) for f_c in f]
        # gcd((X+delta)^((p-1)/2) - 1, f)
        base = [delta % p, 1]
        h = ppowmod(base, (p - 1) // 2, f, p)
        h = psub(h, [1], p)
        g = pgcd(h, f, p)
        if 0 < deg(g) < n:
            left = _split_linear(g, p, rng)
            right = _split_linear(pdivmod(f, g, p)[0], p, rng)
            return left + right


def factor(f, p, rng=None):
    """Monic irreducible factors with multiplicity (Cantor-Zassenhaus)."""
    rng = rng or random.Random(40961)
    f = monic([c % p for c in f], p)
    out = []
    while deg(f) > 0:
        sf = squarefree_part(f, p)
        for g in _factor_squarefree(sf, p, rng):
            while True:
                q, r = pdivmod(f, g, p)
                if r:
                    break
                out.append(g)
                f = q
    return sorted(out, key=lambda g: (deg(g), list(reversed(g))))


def _factor_squarefree(f, p, rng):
    out = []
    d = 1
    xq = ppowmod(pX(), p, f, p)
    power = list(xq)
    while deg(f) >= 2 * d:
        g = pgcd(psub(power, pX(), p), f, p)
        if deg(g) > 0:
            out.extend(_equal_degree_split(g, d, p, rng))
            f = pdivmod(f, g, p)[0]
            power = pmod(power, f, p)
        d += 1
        if deg(f) >= 2 * d:
            power = ppowmod(power, p, f, p)
    if deg(f) > 0:
        out.append(monic(f, p))
    return out


def _equal_degree_split(f, d, p, rng):
    n = deg(f)
    if n == d:
        return [monic(f, p)]
    if n % d != 0:
        raise ValueError(f"degree {n} not a multiple of factor degree {d}")
    while True:
        a = [rng.randrange(p) for _ in range(n)]
        trim(a)
        if deg(a) < 1:
            continue
        h = ppowmod(a, (p**d - 1) // 2, f, p)
        g = pgcd(psub(h, [1], p), f, p)
        if 0 < deg(g) < n:
            return _equal_degree_split(g, d, p, rng) + _equal_degree_split(
                pdivmod(f, g, p)[0], d, p, rng
            )
