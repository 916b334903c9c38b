"""Nondegenerate rational quadratic forms and their classification over Q.

A form is stored as its symmetric Gram matrix.  Local invariants are read
off the leading principal minors whenever those are all nonzero, which
avoids ever factoring a pivot: only the determinant and the common
denominator of the Gram matrix are factored.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .exactnum import (
    INF,
    as_fraction,
    factorize,
    format_rational,
    hilbert_symbol,
    padic_is_square,
    square_class_product,
    squarefree_part,
)
import numpy as np

from .linalg import bareiss_minors, common_denominator, det_int


class DegenerateFormError(ValueError):
    pass


class DeciderDisagreement(AssertionError):
    """The two projective-equivalence deciders returned different answers."""


@dataclass(frozen=True)
class QuadForm:
    gram: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        g = tuple(tuple(as_fraction(x) for x in row) for row in self.gram)
        n = len(g)
        if any(len(row) != n for row in g):
            raise ValueError("Gram matrix must be square")
        for i in range(n):
            for j in range(i):
                if g[i][j] != g[j][i]:
                    raise ValueError("Gram matrix must be symmetric")
        object.__setattr__(self, "gram", g)
        if self.det == 0:
            raise DegenerateFormError("degenerate quadratic form")

    @classmethod
    def diagonal(cls, entries: Iterable) -> "QuadForm":
        e = [as_fraction(x) for x in entries]
        n = len(e)
        return cls(tuple(tuple(e[i] if i == j else Fraction(0) for j in range(n)) for i in range(n)))

    @classmethod
    def identity(cls, n: int) -> "QuadForm":
        return cls.diagonal([1] * n)

    @property
    def dim(self) -> int:
        return len(self.gram)

    def __repr__(self) -> str:
        if self.is_diagonal():
            return f"QuadForm<{', '.join(str(self.gram[i][i]) for i in range(self.dim))}>"
        return f"QuadForm(dim={self.dim})"

    def is_diagonal(self) -> bool:
        return all(self.gram[i][j] == 0 for i in range(self.dim) for j in range(self.dim) if i != j)

    # -- integer model -----------------------------------------------------

    @cached_property
    def _scale(self) -> int:
        return common_denominator(x for row in self.gram for x in row)

    @cached_property
    def _integral(self) -> list[list[int]]:
        c = self._scale
        return [[int(x * c) for x in row] for row in self.gram]

    @cached_property
    def _minors(self) -> list[int]:
        return bareiss_minors(self._integral)

    @cached_property
    def det(self) -> Fraction:
        n = self.dim
        if n == 0:
            return Fraction(1)
        D = self._minors
        top = D[-1] if len(D) == n else det_int(self._integral)
        return Fraction(top, self._scale**n)

    @property
    def _fast(self) -> bool:
        return len(self._minors) == self.dim and all(self._minors)

    def is_positive_definite(self) -> bool:
        return self._fast and all(m > 0 for m in self._minors)

    @cached_property
    def pivots(self) -> tuple[Fraction, ...]:
        return tuple(diagonalize(self))

    @cached_property
    def signature(self) -> tuple[int, int]:
        pos = sum(1 for a in self.pivots if a > 0)
        return pos, self.dim - pos

    @cached_property
    def _local_pairs(self) -> list[tuple[int | Fraction, int | Fraction]]:
        """(a_1...a_{j-1}, a_j) for j >= 2, up to squares."""
        if self._fast:
            c = self._scale
            D = self._minors
            pairs = []
            for j in range(1, self.dim):
                prefix = D[j - 1] * (c if j % 2 else 1)
                pairs.append((prefix, D[j] * D[j - 1] * c))
            return pairs
        a = self.pivots
        pairs = []
        prefix = Fraction(1)
        for j in range(1, self.dim):
            prefix *= a[j - 1]
            pairs.append((prefix, a[j]))
        return pairs

    @cached_property
    def prime_set(self) -> tuple[int, ...]:
        """Primes outside of which every local invariant of the form is trivial.

        Odd primes not dividing the denominators or the determinant see an
        integral form with unit determinant, whose Hasse-Witt invariant is 1.
        """
        primes = {2}
        primes.update(factorize(self._scale))
        d = self.det
        primes.update(factorize(d.numerator))
        primes.update(factorize(d.denominator))
        return tuple(sorted(primes))

    @cached_property
    def disc(self) -> int:
        d = self.det
        s = -1 if d < 0 else 1
        for n in (d.numerator, d.denominator):
            for p, e in factorize(n).items():
                if e % 2:
                    s *= p
        return s

    def hasse_witt(self, p) -> int:
        s = 1
        for a, b in self._local_pairs:
            s *= hilbert_symbol(a, b, p)
        return s

    @cached_property
    def fingerprint(self) -> "FormFingerprint":
        eps = tuple((p, self.hasse_witt(p)) for p in self.prime_set)
        return FormFingerprint(self.dim, self.signature, self.disc, eps)

    # -- constructions -----------------------------------------------------

    def scale(self, m) -> "QuadForm":
        m = as_fraction(m)
        return QuadForm(tuple(tuple(m * x for x in row) for row in self.gram))

    def permuted(self, order: Sequence[int]) -> "QuadForm":
        return QuadForm(tuple(tuple(self.gram[i][j] for j in order) for i in order))

    def transform(self, C: Sequence[Sequence]) -> "QuadForm":
        """The form C^T F C."""
        n = self.dim
        G = self.gram
        GC = [[sum(G[i][k] * C[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
        return QuadForm(tuple(tuple(sum(C[k][i] * GC[k][j] for k in range(n)) for j in range(n)) for i in range(n)))

    def block(self, start: int, stop: int) -> "QuadForm":
        return QuadForm(tuple(row[start:stop] for row in self.gram[start:stop]))

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        return {"dim": self.dim, "gram": [[format_rational(x) for x in row] for row in self.gram]}

    @classmethod
    def from_json(cls, data: dict) -> "QuadForm":
        f = cls(tuple(tuple(as_fraction(x) for x in row) for row in data["gram"]))
        if f.dim != data.get("dim", f.dim):
            raise ValueError("dim does not match gram")
        return f


def diagonalize(f: QuadForm, order: Sequence[int] | None = None) -> list[Fraction]:
    """Diagonal entries of a form equivalent to f, by symmetric elimination."""
    if order is not None:
        f = f.permuted(order)
    if f._fast:
        c = f._scale
        D = f._minors
        return [Fraction(D[k], (D[k - 1] if k else 1) * c) for k in range(f.dim)]
    A = [list(row) for row in f.gram]
    n = len(A)
    out = []
    for k in range(n):
        if A[k][k] == 0:
            j = next((j for j in range(k + 1, n) if A[j][j] != 0), None)
            if j is not None:
                A[k], A[j] = A[j], A[k]
                for row in A:
                    row[k], row[j] = row[j], row[k]
            else:
                j = next((j for j in range(k + 1, n) if A[k][j] != 0), None)
                if j is None:
                    raise DegenerateFormError("degenerate quadratic form")
                # e_k -> e_k + e_j gives A[k][k] = 2 A[k][j]
                for i in range(n):
                    A[k][i] += A[j][i]
                for i in range(n):
                    A[i][k] += A[i][j]
        p = A[k][k]
        out.append(p)
        for i in range(k + 1, n):
            if A[i][k]:
                c = A[i][k] / p
                for j in range(k + 1, n):
                    A[i][j] -= c * A[k][j]
                A[i][k] = Fraction(0)
        for j in range(k + 1, n):
            A[k][j] = Fraction(0)
    return out


def discriminant(f: QuadForm) -> int:
    return f.disc


def hasse_witt(f: QuadForm, p) -> int:
    return f.hasse_witt(p)


def hasse_witt_pairwise(entries: Sequence, p) -> int:
    """prod_{i<j} (a_i, a_j)_p for a list of diagonal entries."""
    s = 1
    for i, j in itertools.combinations(range(len(entries)), 2):
        s *= hilbert_symbol(entries[i], entries[j], p)
    return s


def direct_sum(f: QuadForm, g: QuadForm) -> QuadForm:
    m, n = f.dim, g.dim
    z = Fraction(0)
    rows = [tuple(row) + (z,) * n for row in f.gram]
    rows += [(z,) * m + tuple(row) for row in g.gram]
    return QuadForm(tuple(rows))


def hyperbolic_plane() -> QuadForm:
    return QuadForm.diagonal([1, -1])


# ---------------------------------------------------------------------------
# fingerprints


@dataclass(frozen=True, eq=False)
class FormFingerprint:
    dim: int
    signature: tuple[int, int]
    disc: int
    eps: tuple[tuple[int, int], ...] = field(default=())

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.eps)

    def eps_at(self, p) -> int:
        for q, e in self.eps:
            if q == p:
                return e
        return 1

    def key(self):
        return (self.dim, self.signature, self.disc, frozenset(p for p, e in self.eps if e == -1))

    def __eq__(self, other):
        if not isinstance(other, FormFingerprint):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "signature": list(self.signature),
            "disc": self.disc,
            "eps": {str(p): e for p, e in self.eps},
        }

    @classmethod
    def from_json(cls, data: dict) -> "FormFingerprint":
        eps = tuple(sorted((int(p), int(e)) for p, e in data["eps"].items()))
        return cls(int(data["dim"]), tuple(data["signature"]), int(data["disc"]), eps)


@dataclass(frozen=True)
class ProjectiveFingerprint:
    """Projective class datum of a positive definite form.

    ``residue`` is the rank mod 4; ``disc`` is kept when the rank is even;
    ``marked`` holds the primes at which the case-appropriate local datum
    is -1 (it is +1 at every other prime).
    """

    residue: int
    disc: int | None
    marked: frozenset

    def to_json(self) -> dict:
        return {"residue": self.residue, "disc": self.disc, "marked": sorted(self.marked)}


def projective_fingerprint(f: QuadForm) -> ProjectiveFingerprint:
    if not f.is_positive_definite():
        raise ValueError("projective fingerprints are defined for positive definite forms")
    fp = f.fingerprint
    d = fp.disc
    r = f.dim % 4
    if r == 0:
        marked = {p for p, e in fp.eps if e == -1 and padic_is_square(d, p)}
        return ProjectiveFingerprint(r, d, frozenset(marked))
    if r == 1:
        return ProjectiveFingerprint(r, None, frozenset(p for p, e in fp.eps if e == -1))
    if r == 2:
        marked = {p for p, e in fp.eps if e == -1 and padic_is_square(-d, p)}
        return ProjectiveFingerprint(r, d, frozenset(marked))
    marked = {p for p, e in fp.eps if hilbert_symbol(d, -1, p) * e == -1}
    return ProjectiveFingerprint(r, None, frozenset(marked))


def twisted_invariant(f: QuadForm, p) -> int:
    """(d(f), -1)_p * eps_p(f)."""
    return hilbert_symbol(f.det, -1, p) * f.hasse_witt(p)


# ---------------------------------------------------------------------------
# decisions


def rationally_equivalent(f: QuadForm, g: QuadForm) -> bool:
    return f.fingerprint == g.fingerprint


def _solve_gf2(rows: list[tuple[int, int]], nvars: int) -> int | None:
    """A solution x (bitmask) of the GF(2) system {popcount(mask & x) = rhs}."""
    pivots: list[tuple[int, int, int]] = []
    for mask, rhs in rows:
        for col, pm, pr in pivots:
            if mask >> col & 1:
                mask ^= pm
                rhs ^= pr
        if mask == 0:
            if rhs:
                return None
            continue
        col = mask.bit_length() - 1
        pivots = [(c, pm ^ mask, pr ^ rhs) if pm >> col & 1 else (c, pm, pr) for c, pm, pr in pivots]
        pivots.append((col, mask, rhs))
    x = 0
    for col, _, rhs in pivots:
        if rhs:
            x |= 1 << col
    return x


def _outside_prime_classes(primes: Sequence[int], n: int, d: int) -> tuple[list[tuple[int, int]], int]:
    """Flip patterns available from primes p outside ``primes``.

    Such a p acts on eps_q (q in primes) and on eps_p itself only through the
    quadratic characters e = [p = 3 mod 4], w = [p = 3, 5 mod 8] and
    s_q = [(p/q) = -1] for odd q in primes.  These are independent (Dirichlet),
    so every bit vector b = (e, w, s_q...) is realised by infinitely many
    primes.  p is usable iff it leaves eps_p alone, a linear condition on b;
    returns a basis of the usable b's paired with their flip masks, and the
    self condition.
    """
    odd = [q for q in primes if q != 2]
    nbits = 2 + len(odd)
    pairs = n * (n - 1) // 2 % 2
    tw = (n - 1) % 2
    u = abs(d)
    v2 = 1 if u % 2 == 0 else 0
    ud = (-1 if d < 0 else 1) * (u >> v2)
    E, W = 1, 2

    def sbit(q):
        return 1 << (2 + odd.index(q))

    # flip masks: bit b of the pattern -> which eps_q it toggles
    flip_at = {}
    flip_at[2] = (E if (pairs + tw * ((ud - 1) // 2 % 2)) % 2 else 0) | (W if tw * v2 else 0)
    for q in odd:
        flip_at[q] = sbit(q) if tw and u % q == 0 else 0
    # self condition at p: pairs * e + tw * bit((d/p)) = 0
    legendre_d = (E if d < 0 else 0) ^ (W if v2 else 0)
    for q in odd:
        if u % q == 0:
            legendre_d ^= sbit(q) ^ (E if q % 4 == 3 else 0)
    cond = (E if pairs else 0) ^ (legendre_d if tw else 0)
    if cond == 0:
        basis = [1 << i for i in range(nbits)]
    else:
        j = cond.bit_length() - 1
        basis = [(1 << i) | ((1 << j) if cond >> i & 1 else 0) for i in range(nbits) if i != j]
    out = []
    for b in basis:
        mask = 0
        for k, q in enumerate(primes):
            if bin(flip_at[q] & b).count("1") % 2:
                mask |= 1 << k
        out.append((b, mask))
    return out, cond


def _primes_below(limit: int) -> np.ndarray:
    sieve = np.ones(limit, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(limit - 1) + 1):
        if sieve[i]:
            sieve[i * i::i] = False
    return np.nonzero(sieve)[0]


def _character_vectors(P: np.ndarray, primes: Sequence[int]) -> list[int]:
    bits = np.where(P % 4 == 3, 1, 0) | np.where((P % 8 == 3) | (P % 8 == 5), 2, 0)
    odd = [q for q in primes if q != 2]
    for i, q in enumerate(odd):
        if q < 1 << 20:
            residue = np.zeros(q, dtype=bool)
            residue[(np.arange(1, q, dtype=np.int64) ** 2) % q] = True
            nonres = ~residue[P % q]
        else:
            nonres = np.array([pow(int(x), (q - 1) // 2, q) != 1 for x in P], dtype=bool)
        bits = bits | np.where(nonres, 1 << (2 + i), 0)
    return [int(b) for b in bits]


def _outside_factor(bits: int, primes: Sequence[int], cond: int) -> int:
    """A prime, or a product of two primes, outside ``primes`` whose character
    vectors XOR to ``bits``; every factor satisfies the self condition ``cond``.

    Characters are multiplicative, so pairing primes (a birthday search) needs
    about 2^(k/2) primes instead of 2^k for a single prime in a class."""
    limit = 1 << 12
    while True:
        P = _primes_below(limit)
        P = P[~np.isin(P, list(primes))]
        seen: dict[int, int] = {}
        for p, c in zip(P.tolist(), _character_vectors(P, primes)):
            if bin(c & cond).count("1") % 2:
                continue
            if c == bits:
                return p
            if c ^ bits in seen:
                return p * seen[c ^ bits]
            seen.setdefault(c, p)
        limit *= 4


def projective_scaling(f: QuadForm, g: QuadForm) -> int | None:
    """A squarefree m > 0 with m*f rationally equivalent to g, or None.

    By the scaling rule eps_p(m f) = eps_p(f) (m, -1)_p^(n(n-1)/2) (m, d)_p^(n-1),
    each prime factor of m toggles a fixed set of local invariants, so the
    admissible exponent vectors of m form an affine space over GF(2).  Primes
    of the union prime set are variables; for even rank, primes outside it
    enter through their quadratic-character classes.
    """
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    if f.signature != g.signature:
        return None
    F, G = f.fingerprint, g.fingerprint
    primes = sorted(set(F.primes) | set(G.primes))
    n = f.dim
    d = F.disc
    pairs = n * (n - 1) // 2
    cols = []
    for q in primes:
        mask = 0
        for k, p in enumerate(primes):
            if hilbert_symbol(q, d, p) ** (n - 1) * hilbert_symbol(q, -1, p) ** pairs == -1:
                mask |= 1 << k
        cols.append(mask)
    outside, cond = [], 0
    if n % 2 == 0:
        if d != G.disc:
            return None
        outside, cond = _outside_prime_classes(primes, n, d)
        cols += [mask for _, mask in outside]
    nvars = len(cols)
    rows = []
    for k, p in enumerate(primes):
        mask = 0
        for v, c in enumerate(cols):
            if c >> k & 1:
                mask |= 1 << v
        rows.append((mask, int(F.eps_at(p) != G.eps_at(p))))
    if n % 2:
        # d(m f) = m d(f), so m is pinned to the class of d(f) d(g)
        target = square_class_product(d, G.disc)
        if target < 0:
            return None
        for k, q in enumerate(primes):
            rows.append((1 << k, int(target % q == 0)))
    x = _solve_gf2(rows, nvars)
    if x is None:
        return None
    m = math.prod(q for k, q in enumerate(primes) if x >> k & 1)
    used = []
    for v, (bits, _) in enumerate(outside):
        if x >> (len(primes) + v) & 1:
            used.append(bits)
    if used:
        combined = 0
        for b in used:
            combined ^= b
        # flips add, so any factor realising the XOR class will do
        m *= _outside_factor(combined, primes, cond)
    if not rationally_equivalent(f.scale(m), g):
        raise AssertionError(f"scaling rule predicted m={m} but the forms differ")
    return m


def projectively_equivalent_by_invariants(f: QuadForm, g: QuadForm) -> bool:
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    return projective_fingerprint(f) == projective_fingerprint(g)


def projectively_equivalent(f: QuadForm, g: QuadForm) -> bool:
    """Whether m*f and g are rationally equivalent for some rational m > 0.

    Positive definite pairs are decided twice, by the scaling search and by
    comparing projective fingerprints; a disagreement raises.
    """
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    by_search = projective_scaling(f, g) is not None
    if f.is_positive_definite() and g.is_positive_definite():
        by_invariants = projectively_equivalent_by_invariants(f, g)
        if by_search != by_invariants:
            raise DeciderDisagreement(f"scaling search says {by_search}, invariants say {by_invariants}")
    return by_search


def realization_test(f: QuadForm, q: QuadForm) -> bool:
    """Whether q is projectively equivalent to f + <1, -1>."""
    n = f.dim
    if not f.is_positive_definite():
        raise ValueError("f must be positive definite")
    if q.dim != n + 2 or q.signature != (n + 1, 1):
        raise ValueError(f"q must have signature ({n + 1}, 1)")
    return projectively_equivalent(direct_sum(f, hyperbolic_plane()), q)


def lorentzian_form(n: int, head: Sequence = ()) -> QuadForm:
    """<head..., 1, ..., 1, -1> of rank n + 2 (signature (n+1, 1))."""
    entries = list(head) + [1] * (n + 1 - len(head)) + [-1]
    return QuadForm.diagonal(entries)


def real_place_symbol(a, b) -> int:
    return hilbert_symbol(a, b, INF)
