"""Small exact linear-algebra helpers over Z and Q (lists of lists)."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

Matrix = list[list]


def identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def zeros(m: int, n: int | None = None) -> list[list[int]]:
    return [[0] * (m if n is None else n) for _ in range(m)]


def transpose(A: Sequence[Sequence]) -> Matrix:
    return [list(r) for r in zip(*A)]


def mat_mul(A: Sequence[Sequence], B: Sequence[Sequence]) -> Matrix:
    Bt = list(zip(*B))
    out = []
    for row in A:
        nz = [(k, a) for k, a in enumerate(row) if a]
        out.append([sum(a * col[k] for k, a in nz) for col in Bt])
    return out


def mat_vec(A: Sequence[Sequence], v: Sequence) -> list:
    return [sum(a * x for a, x in zip(row, v) if a) for row in A]


def congruence(A: Sequence[Sequence], S: Sequence[Sequence]) -> Matrix:
    """A^T S A."""
    return mat_mul(transpose(A), mat_mul(S, A))


def block_diag(*blocks: Sequence[Sequence]) -> Matrix:
    n = sum(len(b) for b in blocks)
    out = zeros(n)
    o = 0
    for b in blocks:
        for i, row in enumerate(b):
            out[o + i][o:o + len(row)] = list(row)
        o += len(b)
    return out


def common_denominator(values) -> int:
    d = 1
    for x in values:
        if isinstance(x, Fraction):
            d = d * x.denominator // math.gcd(d, x.denominator)
    return d


def bareiss_minors(M: Sequence[Sequence[int]]) -> list[int]:
    """Leading principal minors D_1..D_k of an integer matrix.

    Stops (returns a shorter list ending in 0) at the first vanishing minor.
    """
    A = [list(r) for r in M]
    n = len(A)
    minors = []
    prev = 1
    for k in range(n):
        piv = A[k][k]
        minors.append(piv)
        if piv == 0:
            return minors
        rk = A[k]
        nzk = [j for j in range(k + 1, n) if rk[j]]
        for i in range(k + 1, n):
            ri = A[i]
            c = ri[k]
            if c == 0:
                if prev == 1:
                    for j in range(k + 1, n):
                        ri[j] = ri[j] * piv
                else:
                    for j in range(k + 1, n):
                        if ri[j]:
                            ri[j] = ri[j] * piv // prev
                continue
            new = [0] * n
            for j in range(k + 1, n):
                new[j] = ri[j] * piv
            for j in nzk:
                new[j] -= c * rk[j]
            if prev != 1:
                for j in range(k + 1, n):
                    if new[j]:
                        new[j] //= prev
            A[i] = new
        prev = piv
    return minors


def det_int(M: Sequence[Sequence[int]]) -> int:
    """Determinant of an integer matrix (fraction-free, with row pivoting)."""
    A = [list(r) for r in M]
    n = len(A)
    sign = 1
    prev = 1
    for k in range(n):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k]:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1] if n else 1


def rref(M: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form over Q and the pivot columns."""
    A = [[Fraction(x) for x in row] for row in M]
    m = len(A)
    n = len(A[0]) if m else 0
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(m):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return A[:r], pivots


def rank(M: Sequence[Sequence]) -> int:
    if not M:
        return 0
    return len(rref(M)[1])


def nullspace(M: Sequence[Sequence], ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of {x : M x = 0} over Q."""
    if not M:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    n = len(M[0])
    R, pivots = rref(M)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, p in zip(R, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def primitive_integer(v: Sequence) -> list[int]:
    """Scale a rational vector to a primitive integer vector (same direction)."""
    d = common_denominator(v)
    w = [int(Fraction(x) * d) for x in v]
    g = 0
    for x in w:
        g = math.gcd(g, x)
    return [x // g for x in w] if g > 1 else w


def sparse_nullspace(rows: list[dict[int, int]], ncols: int) -> list[dict[int, Fraction]]:
    """Nullspace basis of a sparse rational system, each row a {column: coefficient} dict.

    The basis is the canonical one attached to the reduced echelon form:
    one vector per free column, with a 1 in that column.
    """
    piv: dict[int, dict[int, Fraction]] = {}
    for raw in rows:
        row = {c: Fraction(v) for c, v in raw.items() if v}
        while row:
            hit = [c for c in row if c in piv]
            if not hit:
                break
            for c in hit:
                f = row.get(c)
                if not f:
                    continue
                for cc, vv in piv[c].items():
                    nv = row.get(cc, 0) - f * vv
                    if nv:
                        row[cc] = nv
                    else:
                        row.pop(cc, None)
        if not row:
            continue
        p = min(row)
        inv = 1 / row[p]
        piv[p] = {c: v * inv for c, v in row.items()}
    # a row never contains an earlier pivot, so clean rows latest-first
    for p in reversed(list(piv)):
        rowp = piv[p]
        for c in [c for c in rowp if c != p and c in piv]:
            f = rowp.pop(c)
            for cc, vv in piv[c].items():
                if cc == c:
                    continue
                nv = rowp.get(cc, 0) - f * vv
                if nv:
                    rowp[cc] = nv
                else:
                    rowp.pop(cc, None)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    fidx = set(free)
    col_users: dict[int, list[int]] = {}
    for p, rowp in piv.items():
        for c in rowp:
            if c in fidx:
                col_users.setdefault(c, []).append(p)
    for f in free:
        v = {f: Fraction(1)}
        for p in col_users.get(f, []):
            v[p] = -piv[p][f]
        basis.append(v)
    return basis
