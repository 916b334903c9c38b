"""Explicit flat manifolds: Hantzsche-Wendt and its extensions, the quotients
C, E, E~, the (Z_3)^2 and (Z_3)^3 ten-manifolds, F, E_3, mapping tori, and
products.  Everything is returned as a torus presentation; quotients of
products of covers are folded into one presentation on the product torus.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .bieberbach import (
    AffineTorusIsometry,
    FlatManifoldPresentation,
    generate_group,
    product,
    torus,
    toral_extension,
)
from .linalg import block_diag, identity, mat_mul

Iso = AffineTorusIsometry
half = Fraction(1, 2)


@dataclass(frozen=True)
class CoverData:
    """A regular cover presented on the same torus, with a deck isometry."""

    base: FlatManifoldPresentation
    cover: FlatManifoldPresentation
    deck: AffineTorusIsometry
    degree: int
    epi: tuple[int, ...] = ()


def _with_blocks(P: FlatManifoldPresentation, label: str, blocks=None) -> FlatManifoldPresentation:
    return FlatManifoldPresentation(P.dim, P.generators, label, blocks)


def _block_monomial(blocks: Sequence[int], perm: Sequence[int], parts: Sequence[Iso]) -> Iso:
    """Output block b is parts[b] applied to input block perm[b]."""
    starts = [0]
    for b in blocks:
        starts.append(starts[-1] + b)
    n = starts[-1]
    L = [[0] * n for _ in range(n)]
    t = [Fraction(0)] * n
    for b, (src, g) in enumerate(zip(perm, parts)):
        if g.dim != blocks[b] or blocks[src] != blocks[b]:
            raise ValueError("block size mismatch")
        for r in range(blocks[b]):
            L[starts[b] + r][starts[src]:starts[src] + blocks[b]] = list(g.linear[r])
            t[starts[b] + r] = g.translation[r]
    return Iso.make(L, t)


def _embed(blocks: Sequence[int], where: int, g: Iso) -> Iso:
    parts = [Iso.identity(b) for b in blocks]
    parts[where] = g
    return _block_monomial(blocks, range(len(blocks)), parts)


def _group_contains(gens: Sequence[Iso], x: Iso) -> bool:
    return x in set(generate_group(gens)) or x.is_identity()


# ---------------------------------------------------------------------------
# Hantzsche-Wendt and its toral extensions

HW_GAMMA = Iso.make([[-1, 0, 0], [0, -1, 0], [0, 0, 1]], [0, half, half])
HW_DELTA = Iso.make([[1, 0, 0], [0, -1, 0], [0, 0, -1]], [half, 0, half])

# values of the three nontrivial characters on (gamma, delta)
CHARACTERS = {1: (-1, 1), 2: (-1, -1), 3: (1, -1)}


def hantzsche_wendt() -> FlatManifoldPresentation:
    return FlatManifoldPresentation(3, (HW_GAMMA, HW_DELTA), "hw")


def hw_tau() -> Iso:
    """The coordinate 3-cycle that normalizes the Hantzsche-Wendt group."""
    gens = [HW_GAMMA, HW_DELTA]
    for L in ([[0, 1, 0], [0, 0, 1], [1, 0, 0]], [[0, 0, 1], [1, 0, 0], [0, 1, 0]]):
        tau = Iso.make(L)
        inv = tau.inverse()
        if all(_group_contains(gens, tau.compose(g).compose(inv)) for g in gens):
            return tau
    raise AssertionError("no coordinate 3-cycle normalizes the group")


def hw_extension(a1: int, a2: int, a3: int) -> FlatManifoldPresentation:
    """HW with rho_i appearing a_i times, via toral extension of the extra copies."""
    if min(a1, a2, a3) < 1:
        raise ValueError("multiplicities must be at least 1")
    extra = [1] * (a1 - 1) + [2] * (a2 - 1) + [3] * (a3 - 1)
    label = f"hw_ext:{a1},{a2},{a3}"
    if not extra:
        return hantzsche_wendt().relabel(label)
    sig = [[[CHARACTERS[c][g] if i == j else 0 for j, _ in enumerate(extra)] for i, c in enumerate(extra)]
           for g in (0, 1)]
    return toral_extension(hantzsche_wendt(), sig).relabel(label)


def _epis():
    return [(0, 1), (1, 0), (1, 1)]


def double_cover(P: FlatManifoldPresentation, epi: tuple[int, int] | None = None,
                 orientable: bool | None = None) -> CoverData:
    """Double cover of a two-generator (Z_2)^2 quotient from a surjection onto Z_2.

    ``epi`` gives the images of the two generators.  When it is omitted the
    three surjections are tried in order and the first whose cover has the
    requested orientability is used.
    """
    if len(P.generators) != 2:
        raise ValueError("expected a presentation with two generators")
    g1, g2 = P.generators
    candidates = [tuple(epi)] if epi is not None else _epis()
    for e in candidates:
        if e not in _epis():
            raise ValueError(f"{e} is not a surjection onto Z_2")
        if e == (0, 1):
            kernel, deck = g1, g2
        elif e == (1, 0):
            kernel, deck = g2, g1
        else:
            kernel, deck = g1.compose(g2), g1
        cover_orientable = kernel.det() == 1
        if orientable is not None and cover_orientable != orientable:
            continue
        cover = FlatManifoldPresentation(P.dim, (kernel,), f"{P.label}~{e[0]}{e[1]}")
        return CoverData(P, cover, deck, 2, e)
    raise ValueError("no double cover with the requested orientability")


def _triples(k: int):
    for a1 in range(1, k - 1):
        for a2 in range(1, k - a1):
            yield a1, a2, k - a1 - a2


def _orientable_cover(k: int, triple=None, epi=None, want_deck_orientable=None) -> CoverData:
    """Lexicographically first (triple, epi) giving an orientable double cover,
    optionally with a prescribed orientation behaviour of the deck map."""
    triples = [tuple(triple)] if triple is not None else list(_triples(k))
    for t in triples:
        B = hw_extension(*t)
        for e in ([tuple(epi)] if epi is not None else _epis()):
            try:
                cd = double_cover(B, e, orientable=True)
            except ValueError:
                continue
            if want_deck_orientable is None or (cd.deck.det() == 1) == want_deck_orientable:
                return cd
    raise ValueError(f"no admissible base of dimension {k}")


# ---------------------------------------------------------------------------
# C, E, E~


def build_C(k: int, triple=None, epi=None) -> FlatManifoldPresentation:
    """Z_4-quotient of B~ x B~ by (x, y) -> (alpha(y), x); dim 2k.

    The base is chosen so that C is orientable exactly when 2k >= 10.
    """
    if k < 3:
        raise ValueError("k must be at least 3")
    want_orientable = 2 * k >= 10
    # det beta = (-1)^k det alpha
    want_deck = want_orientable if k % 2 == 0 else not want_orientable
    cd = _orientable_cover(k, triple, epi, want_deck)
    h0, alpha = cd.cover.generators[0], cd.deck
    blocks = (k, k)
    e = Iso.identity(k)
    gens = (
        _embed(blocks, 0, h0),
        _embed(blocks, 1, h0),
        _block_monomial(blocks, (1, 0), (alpha, e)),
    )
    return FlatManifoldPresentation(2 * k, gens, f"C:k={k}", blocks)


def _e_pieces(k: int, triple=None, epi=None):
    cd = _orientable_cover(k, triple, epi)
    h0, alpha = cd.cover.generators[0], cd.deck
    e = Iso.identity(k)
    blocks = (k,) * 4
    cover_gens = tuple(_embed(blocks, b, h0) for b in range(4))
    i = _block_monomial(blocks, (1, 0, 3, 2), (e, alpha, e, alpha))
    j = _block_monomial(blocks, (2, 3, 0, 1), (e, alpha, alpha, e))
    return blocks, cover_gens, i, j


def build_E(k: int, triple=None, epi=None) -> tuple[FlatManifoldPresentation, FlatManifoldPresentation]:
    """The Q_8-quotient E of (B~)^4 and its double cover E~ = (B~)^4 / <i>."""
    if k < 3:
        raise ValueError("k must be at least 3")
    blocks, cover_gens, i, j = _e_pieces(k, triple, epi)
    E = FlatManifoldPresentation(4 * k, cover_gens + (i, j), f"E:k={k}", blocks)
    Et = FlatManifoldPresentation(4 * k, cover_gens + (i,), f"E_tilde:k={k}", blocks)
    return E, Et


def build_E_cover(k: int) -> CoverData:
    """E~ with the deck transformation j of E~ -> E."""
    blocks, cover_gens, i, j = _e_pieces(k)
    E = FlatManifoldPresentation(4 * k, cover_gens + (i, j), f"E:k={k}", blocks)
    Et = FlatManifoldPresentation(4 * k, cover_gens + (i,), f"E_tilde:k={k}", blocks)
    return CoverData(E, Et, j, 2)


# ---------------------------------------------------------------------------
# the (Z_3)^3 ten-manifold and its extensions

A3 = ((0, -1), (1, -1))
MU = (Fraction(2, 3), Fraction(1, 3))
_I2 = ((1, 0), (0, 1))


def _power2(k: int):
    M = [list(r) for r in _I2]
    for _ in range(k % 3):
        M = mat_mul(A3, M)
    return tuple(map(tuple, M))


def _c3_element(powers: Sequence[int], shifts: Sequence[bool], extra: Sequence[int]) -> Iso:
    parts = []
    for p, s in zip(list(powers) + list(extra), list(shifts) + [False] * len(extra)):
        parts.append(Iso.make(_power2(p), MU if s else (0, 0)))
    blocks = (2,) * len(parts)
    return _block_monomial(blocks, range(len(parts)), parts)


def _c3_generators(m: int) -> tuple[Iso, Iso, Iso]:
    # the extension blocks carry A under alpha and are trivial under beta, gamma
    alpha = _c3_element((0, 1, 1, 1, 1), (True, True, False, False, False), [1] * m)
    beta = _c3_element((1, 1, 0, 2, 1), (False, False, True, True, False), [0] * m)
    gamma = _c3_element((0, 1, 0, 0, 0), (False, False, False, False, True), [0] * m)
    return alpha, beta, gamma


def build_wtC3(m: int = 0) -> FlatManifoldPresentation:
    """The (Z_3)^2 cover C~ generated by alpha and beta, dim 10 + 2m."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    alpha, beta, _ = _c3_generators(m)
    n = 10 + 2 * m
    return FlatManifoldPresentation(n, (alpha, beta), f"wtC3:{m}", (2,) * (n // 2))


def build_C3_full(m: int = 0) -> CoverData:
    """The (Z_3)^3 quotient C with the deck map gamma of C~ -> C."""
    alpha, beta, gamma = _c3_generators(m)
    n = 10 + 2 * m
    full = FlatManifoldPresentation(n, (alpha, beta, gamma), f"C3_ext:{m}", (2,) * (n // 2))
    return CoverData(full, build_wtC3(m), gamma, 3)


# ---------------------------------------------------------------------------
# F and E_3


def build_F(k: int = 0, l: int = 0) -> FlatManifoldPresentation:
    """Z_6-quotient of C~ x C~ x E~ x HW by g = (alpha(y), alpha(x), beta(z), tau(w))."""
    if k < 0 or l < 0:
        raise ValueError("k, l must be nonnegative")
    c3 = build_C3_full(k)
    ecov = build_E_cover(3 + l)
    cdim = c3.cover.dim
    cb = c3.cover.blocks
    eb = ecov.cover.blocks
    blocks = cb + cb + eb + (3,)
    nc, ne = len(cb), len(eb)
    dims = (cdim, cdim, ecov.cover.dim, 3)

    def on_factor(which: int, g: Iso) -> Iso:
        pieces = [Iso.identity(d) for d in dims]
        pieces[which] = g
        out = pieces[0]
        for p in pieces[1:]:
            out = out.direct_sum(p)
        return out

    gens = [on_factor(0, g) for g in c3.cover.generators]
    gens += [on_factor(1, g) for g in c3.cover.generators]
    gens += [on_factor(2, g) for g in ecov.cover.generators]
    gens += [on_factor(3, g) for g in (HW_GAMMA, HW_DELTA)]
    # g swaps the two C~ factors (applying alpha), acts by beta on E~, tau on HW
    alpha = c3.deck
    swap = Iso.make(
        [[0] * cdim + list(r) for r in alpha.linear] + [list(r) + [0] * cdim for r in alpha.linear],
        alpha.translation + alpha.translation,
    )
    g = swap.direct_sum(ecov.deck).direct_sum(hw_tau())
    gens.append(g)
    n = 2 * cdim + ecov.cover.dim + 3
    assert n == 35 + 4 * (k + l) and len(blocks) == 2 * nc + ne + 1
    return FlatManifoldPresentation(n, tuple(gens), f"F:k={k},l={l}", blocks)


def build_Ep(k: int = 0) -> FlatManifoldPresentation:
    """Z_2-quotient of E~ x B_3 x B_3 by (x, y, z) -> (alpha(x), z, y), with p = 3."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    ecov = build_E_cover(3 + k)
    B = build_wtC3(0)
    dims = (ecov.cover.dim, B.dim, B.dim)
    blocks = ecov.cover.blocks + B.blocks + B.blocks

    def on_factor(which: int, g: Iso) -> Iso:
        pieces = [Iso.identity(d) for d in dims]
        pieces[which] = g
        out = pieces[0]
        for p in pieces[1:]:
            out = out.direct_sum(p)
        return out

    gens = [on_factor(0, g) for g in ecov.cover.generators]
    gens += [on_factor(1, g) for g in B.generators] + [on_factor(2, g) for g in B.generators]
    b = B.dim
    swap = Iso.make([[0] * b + [int(i == j) for j in range(b)] for i in range(b)]
                    + [[int(i == j) for j in range(b)] + [0] * b for i in range(b)])
    gens.append(ecov.deck.direct_sum(swap))
    n = sum(dims)
    return FlatManifoldPresentation(n, tuple(gens), f"Ep:k={k}", blocks)


# ---------------------------------------------------------------------------
# mapping tori

PHI7 = (1, 1, 1, 1, 1, 1, 1)  # x^6 + ... + 1, leading coefficient first
PHI15 = (1, -1, 0, 1, -1, 1, 0, -1, 1)  # x^8 - x^7 + x^5 - x^4 + x^3 - x + 1


def companion(poly: Sequence[int]) -> list[list[int]]:
    """Companion matrix of a monic integer polynomial (coefficients, leading first)."""
    if poly[0] != 1:
        raise ValueError("polynomial must be monic")
    d = len(poly) - 1
    C = [[0] * d for _ in range(d)]
    for i in range(1, d):
        C[i][i - 1] = 1
    for i in range(d):
        C[i][d - 1] = -poly[d - i]
    return C


def mapping_torus(k: int, l: int) -> FlatManifoldPresentation:
    if k < 0 or l < 0 or (k, l) == (0, 0):
        raise ValueError("need (k, l) != (0, 0) with k, l >= 0")
    A = block_diag(*([companion(PHI7)] * k + [companion(PHI15)] * l + [[[1]]]))
    d = (7 if k else 1) * (15 if l else 1)
    n = 6 * k + 8 * l + 1
    t = [0] * (n - 1) + [Fraction(1, d)]
    return FlatManifoldPresentation(n, (Iso.make(A, t),), f"mt:k={k},l={l}")


# ---------------------------------------------------------------------------
# family strings


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class FamilySpec:
    family: str
    params: tuple = ()
    children: tuple = field(default=())

    FAMILIES = ("hw", "hw_ext", "C", "E", "E_tilde", "wtC3", "C3_ext", "F", "Ep", "mapping_torus", "product", "torus")

    def __str__(self) -> str:
        if self.family == "product":
            return "product:(" + ", ".join(str(c) for c in self.children) + ")"
        if self.family == "hw":
            return "hw"
        if self.family == "torus":
            return "S1" if self.params == (1,) else f"torus:{self.params[0]}"
        if self.family == "hw_ext":
            return "hw_ext:" + ",".join(map(str, self.params))
        if self.family in ("wtC3", "C3_ext"):
            return f"{self.family}:{self.params[0]}"
        names = {"C": ("k",), "E": ("k",), "E_tilde": ("k",), "F": ("k", "l"), "Ep": ("k",),
                 "mapping_torus": ("k", "l")}[self.family]
        head = "mt" if self.family == "mapping_torus" else self.family
        return head + ":" + ",".join(f"{a}={v}" for a, v in zip(names, self.params))

    @property
    def dim(self) -> int:
        f, p = self.family, self.params
        if f == "hw":
            return 3
        if f == "torus":
            return p[0]
        if f == "hw_ext":
            return sum(p)
        if f in ("C",):
            return 2 * p[0]
        if f in ("E", "E_tilde"):
            return 4 * p[0]
        if f in ("wtC3", "C3_ext"):
            return 10 + 2 * p[0]
        if f == "F":
            return 35 + 4 * (p[0] + p[1])
        if f == "Ep":
            return 32 + 4 * p[0]
        if f == "mapping_torus":
            return 6 * p[0] + 8 * p[1] + 1
        return sum(c.dim for c in self.children)

    def build(self) -> FlatManifoldPresentation:
        f, p = self.family, self.params
        if f == "hw":
            P = hantzsche_wendt()
        elif f == "torus":
            P = torus(p[0])
        elif f == "hw_ext":
            P = hw_extension(*p)
        elif f == "C":
            P = build_C(p[0])
        elif f == "E":
            P = build_E(p[0])[0]
        elif f == "E_tilde":
            P = build_E(p[0])[1]
        elif f == "wtC3":
            P = build_wtC3(p[0])
        elif f == "C3_ext":
            P = build_C3_full(p[0]).base
        elif f == "F":
            P = build_F(*p)
        elif f == "Ep":
            P = build_Ep(p[0])
        elif f == "mapping_torus":
            P = mapping_torus(*p)
        else:
            P = self.children[0].build()
            for c in self.children[1:]:
                P = product(P, c.build())
        return P.relabel(str(self))


def _split_top(s: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise SpecError("unbalanced parentheses")
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    if depth:
        raise SpecError("unbalanced parentheses")
    out.append(cur)
    return [x.strip() for x in out]


def _keyed(args: str, names: Sequence[str], defaults: Sequence[int | None]) -> tuple[int, ...]:
    vals = dict(zip(names, defaults))
    parts = [a for a in _split_top(args) if a] if args else []
    for pos, a in enumerate(parts):
        if "=" in a:
            key, v = (x.strip() for x in a.split("=", 1))
            if key not in vals:
                raise SpecError(f"unknown parameter {key!r}")
        else:
            if pos >= len(names):
                raise SpecError("too many parameters")
            key, v = names[pos], a
        if not re.fullmatch(r"-?\d+", v):
            raise SpecError(f"parameter {key} must be an integer")
        vals[key] = int(v)
    if any(v is None for v in vals.values()):
        raise SpecError(f"missing parameter among {list(names)}")
    return tuple(vals[n] for n in names)


def parse_family(text: str) -> FamilySpec:
    s = text.strip()
    if not s:
        raise SpecError("empty family spec")
    head, _, args = s.partition(":")
    head, args = head.strip(), args.strip()
    low = head.lower()
    if low == "s1" and not args:
        return FamilySpec("torus", (1,))
    if low == "hw" and not args:
        return FamilySpec("hw")
    if low in ("torus", "t"):
        (n,) = _keyed(args, ("n",), (None,))
        if n < 1:
            raise SpecError("torus dimension must be positive")
        return FamilySpec("torus", (n,))
    if low == "hw_ext":
        a = _keyed(args, ("a1", "a2", "a3"), (None, None, None))
        if min(a) < 1:
            raise SpecError("hw_ext multiplicities must be >= 1")
        return FamilySpec("hw_ext", a)
    if head in ("C", "E", "E_tilde"):
        (k,) = _keyed(args, ("k",), (None,))
        if k < 3:
            raise SpecError("k must be >= 3")
        return FamilySpec(head, (k,))
    if head in ("wtC3", "C3_ext"):
        (m,) = _keyed(args, ("m",), (0,))
        if m < 0:
            raise SpecError("m must be >= 0")
        return FamilySpec(head, (m,))
    if head == "F":
        p = _keyed(args, ("k", "l"), (0, 0))
        if min(p) < 0:
            raise SpecError("k, l must be >= 0")
        return FamilySpec("F", p)
    if head == "Ep":
        p = _keyed(args, ("k", "p"), (0, 3))
        if p[1] != 3:
            raise SpecError("only p = 3 has an explicit construction")
        if p[0] < 0:
            raise SpecError("k must be >= 0")
        return FamilySpec("Ep", (p[0],))
    if low in ("mt", "mapping_torus"):
        p = _keyed(args, ("k", "l"), (0, 0))
        if min(p) < 0 or p == (0, 0):
            raise SpecError("need (k, l) != (0, 0)")
        return FamilySpec("mapping_torus", p)
    if low == "product":
        inner = args
        if not (inner.startswith("(") and inner.endswith(")")):
            raise SpecError("product needs a parenthesized list")
        factors: list[str] = []
        for piece in _split_top(inner[1:-1]):
            # "l=0" or "1" continues the previous factor's parameter list
            if factors and re.fullmatch(r"(\w+\s*=\s*)?-?\d+", piece):
                factors[-1] += "," + piece
            else:
                factors.append(piece)
        kids = tuple(parse_family(c) for c in factors)
        if len(kids) < 2:
            raise SpecError("product needs at least two factors")
        return FamilySpec("product", (), kids)
    raise SpecError(f"unknown family {head!r}")


def build(text: str) -> FlatManifoldPresentation:
    return parse_family(text).build()
