"""Exact scalars: square classes, local symbols and integer lattice normal forms.

Rationals are plain :class:`fractions.Fraction` values; square classes of
nonzero rationals are represented by signed squarefree integers.  The real
place is ``INF`` (``math.inf``) wherever a prime is expected.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import sympy

INF = math.inf

# composite cofactors left after this go to sympy (Pollard rho and friends)
TRIAL_DIVISION_BOUND = 10**3

Rational = int | Fraction


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def format_rational(x) -> str:
    x = as_fraction(x)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# primes and factorization

def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return bool(sympy.isprime(n))


def _trial_divide(n: int, bound: int) -> tuple[dict[int, int], int]:
    factors: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
    d = 5
    step = 2
    while d <= bound and d * d <= n:
        while n % d == 0:
            factors[d] = factors.get(d, 0) + 1
            n //= d
        d += step
        step = 6 - step
    return factors, n


@lru_cache(maxsize=65536)
def _factor_cached(n: int, bound: int) -> tuple[tuple[int, int], ...]:
    factors, rest = _trial_divide(n, bound)
    if rest > 1:
        if rest < bound * bound or is_prime(rest):
            factors[rest] = factors.get(rest, 0) + 1
        else:
            # cofactor has no prime factor below the bound
            for p, e in sympy.factorint(rest).items():
                factors[int(p)] = factors.get(int(p), 0) + int(e)
    return tuple(sorted(factors.items()))


def factorize(n: int, bound: int = TRIAL_DIVISION_BOUND) -> dict[int, int]:
    """Prime factorization of ``|n|`` (n != 0).

    Trial division up to ``bound``; a composite cofactor left over after that
    is handed to :func:`sympy.factorint`.
    """
    n = abs(int(n))
    if n == 0:
        raise ValueError("cannot factor 0")
    if n == 1:
        return {}
    return dict(_factor_cached(n, bound))


def prime_divisors(n: int) -> list[int]:
    return [p for p, _ in sorted(factorize(n).items())]


def valuation(x: Rational, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    x = as_fraction(x)
    if x == 0:
        raise ValueError("valuation of zero")
    v = 0
    num, den = abs(x.numerator), x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def _split(x: Rational, p: int) -> tuple[int, int]:
    """Return ``(v, u)`` with x = p^v * (unit) and u an integer in the unit's square class."""
    x = as_fraction(x)
    if x == 0:
        raise ValueError("zero has no p-adic unit part")
    num, den = x.numerator, x.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    # 1/den and den differ by the square den^2
    return v, num * den


# ---------------------------------------------------------------------------
# square classes

def squarefree_part(x: Rational, bound: int = TRIAL_DIVISION_BOUND) -> int:
    """The squarefree integer s with x = s * r^2 for a rational r."""
    x = as_fraction(x)
    if x == 0:
        raise ValueError("squarefree part of zero")
    s = -1 if x < 0 else 1
    for n in (x.numerator, x.denominator):
        for p, e in factorize(n, bound).items():
            if e % 2:
                s *= p
    return s


def square_class_product(a: int, b: int) -> int:
    """Product of two squarefree integers, reduced back to squarefree."""
    g = math.gcd(a, b)
    return (a // g) * (b // g)


def prime_set(values: Iterable[Rational]) -> tuple[int, ...]:
    """{2} together with every prime dividing a numerator or denominator."""
    primes = {2}
    for x in values:
        x = as_fraction(x)
        if x == 0:
            raise ValueError("prime set of a collection containing zero")
        primes.update(prime_divisors(x.numerator))
        primes.update(prime_divisors(x.denominator))
    return tuple(sorted(primes))


# ---------------------------------------------------------------------------
# Legendre and Hilbert symbols

def legendre_symbol(a: int, p: int) -> int:
    if p == 2 or not is_prime(p):
        raise ValueError(f"{p} is not an odd prime")
    r = pow(int(a) % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def _is_place(p) -> bool:
    return p == INF or (isinstance(p, int) and is_prime(p))


def padic_is_square(a: Rational, p) -> bool:
    """Whether a is a square in Q_p (``p = INF`` means the reals)."""
    a = as_fraction(a)
    if a == 0:
        raise ValueError("zero is excluded")
    if p == INF:
        return a > 0
    if not _is_place(p):
        raise ValueError(f"{p} is not a prime")
    v, u = _split(a, p)
    if v % 2:
        return False
    if p == 2:
        return u % 8 == 1
    return legendre_symbol(u, p) == 1


def _eps2(u: int) -> int:
    return ((u - 1) // 2) % 2


def _omega2(u: int) -> int:
    return ((u * u - 1) // 8) % 2


def hilbert_symbol(a: Rational, b: Rational, p) -> int:
    """The Hilbert symbol (a, b)_p, with ``p = INF`` for the real place."""
    a, b = as_fraction(a), as_fraction(b)
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol of zero")
    if p == INF:
        return -1 if (a < 0 and b < 0) else 1
    if p == 2:
        alpha, u = _split(a, 2)
        beta, w = _split(b, 2)
        e = _eps2(u) * _eps2(w) + alpha * _omega2(w) + beta * _omega2(u)
        return -1 if e % 2 else 1
    if not is_prime(p):
        raise ValueError(f"{p} is not a prime")
    alpha, u = _split(a, p)
    beta, w = _split(b, p)
    s = 1
    if (alpha * beta) % 2 and p % 4 == 3:
        s = -s
    if beta % 2:
        s *= legendre_symbol(u, p)
    if alpha % 2:
        s *= legendre_symbol(w, p)
    return s


# ---------------------------------------------------------------------------
# integer lattices

IntMatrix = list[list[int]]


def _identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(M: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return ``(U, D, V)`` with ``U @ M @ V == D``, U and V unimodular.

    D is diagonal (rectangular, same shape as M) with d1 | d2 | ... and
    nonnegative entries.
    """
    D = [[int(x) for x in row] for row in M]
    m = len(D)
    n = len(D[0]) if m else 0
    U = _identity(m)
    V = _identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):  # row_dst += c * row_src
        D[dst] = [x + c * y for x, y in zip(D[dst], D[src])]
        U[dst] = [x + c * y for x, y in zip(U[dst], U[src])]

    def add_col(src, dst, c):  # col_dst += c * col_src
        for row in D:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]

    t = 0
    while t < min(m, n):
        # smallest nonzero entry of the remaining block as pivot
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if D[i][j] and (best is None or abs(D[i][j]) < abs(D[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            done = True
            for i in range(t + 1, m):
                if D[i][t]:
                    q = D[i][t] // D[t][t]
                    add_row(t, i, -q)
                    if D[i][t]:
                        done = False
            for j in range(t + 1, n):
                if D[t][j]:
                    q = D[t][j] // D[t][t]
                    add_col(t, j, -q)
                    if D[t][j]:
                        done = False
            if done:
                # divisibility of the rest of the block
                bad = None
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if D[i][j] % D[t][t]:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                add_row(bad, t, 1)
                continue
            # move the smallest entry of row/column t into the pivot slot
            best = (t, t)
            for i in range(t, m):
                if D[i][t] and abs(D[i][t]) < abs(D[best[0]][best[1]]):
                    best = (i, t)
            for j in range(t, n):
                if D[t][j] and abs(D[t][j]) < abs(D[best[0]][best[1]]):
                    best = (t, j)
            swap_rows(t, best[0])
            swap_cols(t, best[1])
        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return U, D, V


def lattice_solve(M: Sequence[Sequence[int]], w: Sequence[Rational]) -> list[int] | None:
    """An integer vector k with ``M k = w``, or None if there is none."""
    m = len(M)
    if m == 0:
        return []
    n = len(M[0])
    w = [as_fraction(x) for x in w]
    U, D, V = smith_normal_form(M)
    b = [sum(U[i][j] * w[j] for j in range(m)) for i in range(m)]
    y = [0] * n
    for i in range(m):
        d = D[i][i] if i < n else 0
        if d == 0:
            if b[i] != 0:
                return None
            continue
        q = b[i] / d
        if q.denominator != 1:
            return None
        y[i] = q.numerator
    return [sum(V[i][j] * y[j] for j in range(n)) for i in range(n)]
