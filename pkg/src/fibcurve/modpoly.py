"""Classical modular polynomials: integer q-expansion of j, table I/O.

Tables for levels 2, 3, 5, 7 ship as data files with one monomial per
line ("level i j coefficient", i >= j, symmetric completion implied).
Every load re-derives the q-expansion identity Phi(j(q^l), j(q)) = 0 up
to q^30, so a corrupted table cannot go unnoticed.
"""

import os
from functools import lru_cache

from .errors import DomainError, VerificationFailure

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
SHIPPED_LEVELS = (2, 3, 5, 7)
VALIDATE_TERMS = 30


@lru_cache(maxsize=8)
def j_series(n_terms):
    """Integer coefficients of j: list c with c[i] the q^(i-1) coefficient.

    j = E4^3 / Delta computed exactly: E4 = 1 + 240 sum sigma_3(n) q^n and
    Delta = q * prod (1-q^n)^24.
    """
    N = n_terms  # power-series length in q
    sigma3 = [0] * N
    for d in range(1, N):
        cube = d * d * d
        for m in range(d, N, d):
            sigma3[m] += cube
    e4 = [1] + [240 * sigma3[n] for n in range(1, N)]
    e4_3 = _series_mul(_series_mul(e4, e4, N), e4, N)
    eta = [0] * N
    eta[0] = 1
    for n in range(1, N):
        # multiply by (1 - q^n)
        for i in range(N - 1, n - 1, -1):
            eta[i] -= eta[i - n]
    eta24 = eta
    for _ in range(3):
        eta24 = _series_mul(eta24, eta24, N)  # eta^8 after 3 squarings
    eta24 = _series_mul(eta24, _series_mul(eta24, eta24, N), N)  # ^24
    inv = _series_inv(eta24, N)
    d = _series_mul(e4_3, inv, N)
    return d  # d[i] is the q^(i-1) coefficient of j


def _series_mul(a, b, N):
    out = [0] * N
    for i, x in enumerate(a):
        if x:
            top = N - i
            for j, y in enumerate(b[:top]):
                if y:
                    out[i + j] += x * y
    return out


def _series_inv(a, N):
    assert a[0] == 1
    out = [0] * N
    out[0] = 1
    for n in range(1, N):
        s = 0
        for k in range(1, n + 1):
            if k < len(a) and a[k]:
                s += a[k] * out[n - k]
        out[n] = -s
    return out


class Laurent:
    """Integer Laurent series, coefficients valid from q^lo through q^hi.

    Validity is tracked explicitly: multiplying series with poles loses
    top-end precision, and products silently narrow hi instead of
    exposing incomplete coefficients.
    """

    __slots__ = ("lo", "hi", "c")

    def __init__(self, lo, hi, coeffs):
        self.lo = lo
        self.hi = hi
        self.c = list(coeffs)
        assert len(self.c) == hi - lo + 1

    def coeff(self, e):
        if self.c is not None and self.lo <= e < self.lo + len(self.c):
            return self.c[e - self.lo]
        return 0

    @classmethod
    def from_j(cls, valid_hi, scale=1):
        """j(q^scale), exact through q^valid_hi."""
        n = valid_hi // scale + 2
        base = j_series(n + 1)  # exponents -1 .. n-1 in the scaled variable
        lo = -scale
        c = [0] * (valid_hi - lo + 1)
        for i, v in enumerate(base):
            e = scale * (i - 1)
            if e <= valid_hi:
                c[e - lo] = v
        return cls(lo, valid_hi, c)

    def mul(self, other):
        if len(self.c) == 1 and self.lo == 0 and self.hi > 10**8:
            return other.scale(self.c[0])
        if len(other.c) == 1 and other.lo == 0 and other.hi > 10**8:
            return self.scale(other.c[0])
        lo = self.lo + other.lo
        hi = min(self.hi + other.lo, other.hi + self.lo)
        if hi < lo:
            raise DomainError("Laurent product has empty valid range")
        out = [0] * (hi - lo + 1)
        for i, x in enumerate(self.c):
            if x:
                ei = self.lo + i
                if ei + other.lo > hi:
                    break
                for j, y in enumerate(other.c):
                    e = ei + other.lo + j
                    if e > hi:
                        break
                    if y:
                        out[e - lo] += x * y
        return Laurent(lo, hi, out)

    def add(self, other):
        lo = min(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        out = [0] * (hi - lo + 1)
        for e in range(lo, hi + 1):
            out[e - lo] = self.coeff(e) + other.coeff(e)
        return Laurent(lo, hi, out)

    def scale(self, k):
        out = Laurent.__new__(Laurent)
        out.lo, out.hi = self.lo, self.hi
        out.c = [k * x for x in self.c]
        return out

    def is_zero_through(self, hi):
        if hi > self.hi:
            raise DomainError("asked beyond the valid range")
        return all(self.coeff(e) == 0 for e in range(self.lo, hi + 1))


def laurent_one():
    out = Laurent.__new__(Laurent)
    out.lo, out.hi = 0, 1 << 30
    out.c = [1]
    return out


class ModularPolynomialTable:
    """Phi_level(X, Y) as a symmetric integer coefficient map."""

    def __init__(self, level, coeffs):
        self.level = level
        self.coeffs = dict(coeffs)  # (i, j) with i >= j -> coefficient
        d = level + 1
        if self.coeffs.get((d, 0), None) is None and self.coeffs.get((d, d)) is None:
            pass
        if self.coeff(d, 0) != 1:
            raise VerificationFailure(f"Phi_{level}: X^{d} coefficient must be 1")

    def coeff(self, i, j):
        if i < j:
            i, j = j, i
        return self.coeffs.get((i, j), 0)

    def degree(self):
        return self.level + 1

    def evaluate_at_y(self, y, p):
        """Phi(X, y) mod p as a dense polynomial in X."""
        d = self.degree()
        ypows = [1] * (d + 1)
        for k in range(1, d + 1):
            ypows[k] = ypows[k - 1] * y % p
        out = [0] * (d + 1)
        for (i, j), c in self.coeffs.items():
            out[i] = (out[i] + c * ypows[j]) % p
            if i != j:
                out[j] = (out[j] + c * ypows[i]) % p
        while out and out[-1] == 0:
            out.pop()
        return out

    def validate(self, terms=VALIDATE_TERMS):
        """Check Phi(j(q^level), j(q)) = 0 through q^terms."""
        ell = self.level
        d = ell + 1
        # validity loss per multiplication is the partner's pole depth
        need = terms + (ell + 1) * d + 4
        A = Laurent.from_j(need, scale=ell)
        B = Laurent.from_j(need, scale=1)
        a_pows = [laurent_one()]
        b_pows = [laurent_one()]
        for _ in range(d):
            a_pows.append(a_pows[-1].mul(A))
            b_pows.append(b_pows[-1].mul(B))
        total = None
        for (i, j), c in self.coeffs.items():
            term = a_pows[i].mul(b_pows[j]).scale(c)
            total = term if total is None else total.add(term)
            if i != j:
                total = total.add(a_pows[j].mul(b_pows[i]).scale(c))
        if total.hi < terms:
            raise VerificationFailure("validation precision bookkeeping failed")
        if not total.is_zero_through(terms):
            bad = next(e for e in range(total.lo, terms + 1) if total.coeff(e))
            raise VerificationFailure(
                f"Phi_{self.level} failed the expansion identity at q^{bad}"
            )
        return True


def _parse_table(text, level=None):
    coeffs = {}
    seen_level = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise DomainError(f"bad table line: {raw!r}")
        ell, i, j, c = (int(x) for x in parts)
        if seen_level is None:
            seen_level = ell
        if ell != seen_level:
            raise DomainError("mixed levels in one table file")
        if i < j:
            raise DomainError("table rows must have i >= j")
        coeffs[(i, j)] = c
    if level is not None and seen_level != level:
        raise DomainError(f"expected level {level}, file has {seen_level}")
    return ModularPolynomialTable(seen_level, coeffs)


@lru_cache(maxsize=16)
def load_table(level, data_dir=None, validate=True):
    path = os.path.join(data_dir or DATA_DIR, f"phi{level}.txt")
    if not os.path.exists(path):
        raise DomainError(f"no modular polynomial table for level {level}")
    with open(path) as fh:
        table = _parse_table(fh.read(), level)
    if validate:
        table.validate()
    return table


def available_levels(data_dir=None):
    out = []
    for level in SHIPPED_LEVELS:
        path = os.path.join(data_dir or DATA_DIR, f"phi{level}.txt")
        if os.path.exists(path):
            out.append(level)
    return out


def render_table(table):
    lines = [f"# classical modular polynomial, level {table.level}"]
    for (i, j), c in sorted(table.coeffs.items(), reverse=True):
        lines.append(f"{table.level} {i} {j} {c}")
    return "\n".join(lines) + "\n"
