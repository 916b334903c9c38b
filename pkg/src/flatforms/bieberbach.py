"""Finite groups of affine torus isometries and the flat manifolds they present.

An element x -> A x + t of T^n is stored with its translation reduced into
[0, 1)^n, so the quotient group acting on the torus is finite and hashable.

Large presentations built as products and quotients of products act
block-monomially: each generator moves whole coordinate blocks around and
acts on each block by a small isometry.  Group closure, freeness and the
holonomy sums are then done on (block permutation, small isometry ids)
pairs, which keeps a 10^5-element group in a dim-35 presentation cheap.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .exactnum import as_fraction, format_rational, lattice_solve
from .linalg import det_int, identity, mat_mul, mat_vec, nullspace, primitive_integer, rank, transpose

GROUP_SIZE_LIMIT = 10**4
STRUCTURED_SIZE_LIMIT = 10**6


class GroupTooLarge(RuntimeError):
    pass


class NotFreeError(ValueError):
    """Some non-identity element of the presented group has a fixed point."""

    def __init__(self, element: "AffineTorusIsometry", label: str = ""):
        self.element = element
        super().__init__(f"{label or 'presentation'}: element with fixed point, linear={element.linear}, "
                         f"translation={[format_rational(x) for x in element.translation]}")


def _mod1(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


@dataclass(frozen=True)
class AffineTorusIsometry:
    linear: tuple[tuple[int, ...], ...]
    translation: tuple[Fraction, ...]

    def __post_init__(self):
        A = tuple(tuple(int(a) for a in row) for row in self.linear)
        t = tuple(_mod1(as_fraction(x)) for x in self.translation)
        n = len(A)
        if any(len(row) != n for row in A) or len(t) != n:
            raise ValueError("shape mismatch")
        object.__setattr__(self, "linear", A)
        object.__setattr__(self, "translation", t)

    @classmethod
    def make(cls, linear: Sequence[Sequence[int]], translation: Sequence | None = None) -> "AffineTorusIsometry":
        n = len(linear)
        return cls(tuple(map(tuple, linear)), tuple(translation) if translation is not None else (0,) * n)

    @classmethod
    def identity(cls, n: int) -> "AffineTorusIsometry":
        return cls.make(identity(n))

    @classmethod
    def translation_by(cls, t: Sequence) -> "AffineTorusIsometry":
        return cls.make(identity(len(t)), t)

    @property
    def dim(self) -> int:
        return len(self.linear)

    def compose(self, other: "AffineTorusIsometry") -> "AffineTorusIsometry":
        """self after other."""
        A = self.linear
        return AffineTorusIsometry(
            tuple(map(tuple, mat_mul(A, other.linear))),
            tuple(a + b for a, b in zip(mat_vec(A, other.translation), self.translation)),
        )

    __matmul__ = compose

    def inverse(self) -> "AffineTorusIsometry":
        g = self
        prev = AffineTorusIsometry.identity(self.dim)
        # finite order on the torus, so the inverse is the last power before identity
        for _ in range(1, 10**4):
            if g.is_identity():
                return prev
            prev = g
            g = self.compose(g)
        raise GroupTooLarge("element of very large order")

    def power(self, k: int) -> "AffineTorusIsometry":
        if k < 0:
            return self.inverse().power(-k)
        out = AffineTorusIsometry.identity(self.dim)
        base = self
        while k:
            if k & 1:
                out = base.compose(out)
            base = base.compose(base)
            k >>= 1
        return out

    def order(self) -> int:
        g = self
        for k in range(1, 10**4):
            if g.is_identity():
                return k
            g = self.compose(g)
        raise GroupTooLarge("element of very large order")

    def det(self) -> int:
        return det_int(self.linear)

    def is_identity(self) -> bool:
        return self.is_translation() and not any(self.translation)

    def is_translation(self) -> bool:
        n = self.dim
        return all(self.linear[i][j] == (i == j) for i in range(n) for j in range(n))

    def apply(self, x: Sequence) -> list[Fraction]:
        return [_mod1(a + b) for a, b in zip(mat_vec(self.linear, x), self.translation)]

    def direct_sum(self, other: "AffineTorusIsometry") -> "AffineTorusIsometry":
        m, n = self.dim, other.dim
        L = [list(r) + [0] * n for r in self.linear] + [[0] * m + list(r) for r in other.linear]
        return AffineTorusIsometry.make(L, self.translation + other.translation)

    def to_json(self) -> dict:
        return {"linear": [list(r) for r in self.linear], "translation": [format_rational(x) for x in self.translation]}

    @classmethod
    def from_json(cls, data: Mapping) -> "AffineTorusIsometry":
        return cls.make(data["linear"], [as_fraction(x) for x in data["translation"]])


def has_fixed_point(iso: AffineTorusIsometry) -> bool:
    """Whether A x + t = x has a solution on the torus."""
    n = iso.dim
    if iso.is_translation():
        return not any(iso.translation)
    M = [[iso.linear[i][j] - (i == j) for j in range(n)] for i in range(n)]
    # rows w with w (A - I) = 0 cut out the rational image of A - I
    W = [primitive_integer(v) for v in nullspace(transpose(M))]
    if not W:
        return True
    Wt = mat_vec(W, iso.translation)
    return lattice_solve(W, Wt) is not None


def generate_group(gens: Sequence[AffineTorusIsometry], limit: int = GROUP_SIZE_LIMIT) -> list[AffineTorusIsometry]:
    """All elements of the finite group generated on the torus, in BFS order."""
    if not gens:
        return []
    n = gens[0].dim
    e = AffineTorusIsometry.identity(n)
    seen = {e}
    out = [e]
    queue = deque([e])
    while queue:
        g = queue.popleft()
        for s in gens:
            h = g.compose(s)
            if h not in seen:
                seen.add(h)
                out.append(h)
                queue.append(h)
                if len(out) > limit:
                    raise GroupTooLarge(f"group exceeds {limit} elements")
    return out


# ---------------------------------------------------------------------------
# presentations


@dataclass(frozen=True)
class FlatManifoldPresentation:
    dim: int
    generators: tuple[AffineTorusIsometry, ...]
    label: str = ""
    blocks: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        for g in self.generators:
            if g.dim != self.dim:
                raise ValueError("generator dimension mismatch")
        if self.blocks is not None:
            object.__setattr__(self, "blocks", tuple(self.blocks))
            if sum(self.blocks) != self.dim:
                raise ValueError("blocks do not add up to dim")

    @property
    def block_dims(self) -> tuple[int, ...]:
        return self.blocks if self.blocks else ((self.dim,) if self.dim else ())

    def relabel(self, label: str) -> "FlatManifoldPresentation":
        return FlatManifoldPresentation(self.dim, self.generators, label, self.blocks)

    def to_json(self) -> dict:
        out = {"dim": self.dim, "generators": [g.to_json() for g in self.generators], "label": self.label}
        if self.blocks:
            out["blocks"] = list(self.blocks)
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "FlatManifoldPresentation":
        gens = tuple(AffineTorusIsometry.from_json(g) for g in data["generators"])
        blocks = tuple(data["blocks"]) if data.get("blocks") else None
        return cls(int(data["dim"]), gens, data.get("label", ""), blocks)


def torus(n: int) -> FlatManifoldPresentation:
    return FlatManifoldPresentation(n, (), f"T{n}")


def product(P: FlatManifoldPresentation, Q: FlatManifoldPresentation) -> FlatManifoldPresentation:
    eP, eQ = AffineTorusIsometry.identity(P.dim), AffineTorusIsometry.identity(Q.dim)
    gens = [g.direct_sum(eQ) for g in P.generators] + [eP.direct_sum(g) for g in Q.generators]
    blocks = P.block_dims + Q.block_dims
    return FlatManifoldPresentation(P.dim + Q.dim, tuple(gens), f"{P.label} x {Q.label}",
                                    blocks if len(blocks) > 1 else None)


def toral_extension(P: FlatManifoldPresentation, sigma: Sequence[Sequence[Sequence[int]]]) -> FlatManifoldPresentation:
    """Generators (A_i + sigma_i, (t_i, 0)); sigma must be a homomorphism on P's group."""
    if len(sigma) != len(P.generators):
        raise ValueError("one sigma matrix per generator")
    m = len(sigma[0]) if sigma else 0
    if m == 0:
        return P
    sig = [AffineTorusIsometry.make(s) for s in sigma]
    # walk the group of pairs; the image must be a function of the element
    image: dict[AffineTorusIsometry, AffineTorusIsometry] = {AffineTorusIsometry.identity(P.dim): AffineTorusIsometry.identity(m)}
    queue = deque(image)
    while queue:
        g = queue.popleft()
        for s, t in zip(P.generators, sig):
            h, k = g.compose(s), image[g].compose(t)
            if h in image:
                if image[h].linear != k.linear:
                    raise ValueError("sigma is not compatible with the relations of the holonomy group")
            else:
                image[h] = k
                queue.append(h)
                if len(image) > GROUP_SIZE_LIMIT:
                    raise GroupTooLarge("group too large for a toral extension check")
    gens = tuple(g.direct_sum(t) for g, t in zip(P.generators, sig))
    blocks = P.block_dims + (m,) if P.blocks else None
    return FlatManifoldPresentation(P.dim + m, gens, f"{P.label}+ext{m}", blocks)


# ---------------------------------------------------------------------------
# block-monomial group walk


class _Interner:
    def __init__(self):
        self.items: list[AffineTorusIsometry] = []
        self.index: dict[AffineTorusIsometry, int] = {}
        self.linear_id: list[int] = []
        self._lin: dict[tuple, int] = {}
        self._comp: dict[tuple[int, int], int] = {}
        self._fixed: dict[int, bool] = {}

    def add(self, g: AffineTorusIsometry) -> int:
        i = self.index.get(g)
        if i is None:
            i = len(self.items)
            self.items.append(g)
            self.index[g] = i
            self.linear_id.append(self._lin.setdefault(g.linear, len(self._lin)))
        return i

    def compose(self, i: int, j: int) -> int:
        key = (i, j)
        r = self._comp.get(key)
        if r is None:
            r = self._comp[key] = self.add(self.items[i].compose(self.items[j]))
        return r

    def fixed(self, i: int) -> bool:
        r = self._fixed.get(i)
        if r is None:
            r = self._fixed[i] = has_fixed_point(self.items[i])
        return r


def _split_blocks(g: AffineTorusIsometry, blocks: Sequence[int]) -> tuple[tuple[int, ...], list[AffineTorusIsometry]]:
    starts = [0]
    for b in blocks:
        starts.append(starts[-1] + b)
    perm = []
    parts = []
    for b in range(len(blocks)):
        r0, r1 = starts[b], starts[b + 1]
        src = None
        for c in range(len(blocks)):
            c0, c1 = starts[c], starts[c + 1]
            if any(g.linear[i][j] for i in range(r0, r1) for j in range(c0, c1)):
                if src is not None:
                    raise ValueError("generator is not block-monomial for the given blocks")
                src = c
        if src is None or blocks[src] != blocks[b]:
            raise ValueError("generator is not block-monomial for the given blocks")
        c0 = starts[src]
        A = [g.linear[i][c0:c0 + blocks[b]] for i in range(r0, r1)]
        perm.append(src)
        parts.append(AffineTorusIsometry.make(A, g.translation[r0:r1]))
    if sorted(perm) != list(range(len(blocks))):
        raise ValueError("generator is not block-monomial for the given blocks")
    return tuple(perm), parts


class BlockGroup:
    """Closure of a block-monomial presentation.

    An element is (perm, ids): output block b is ids[b] applied to input
    block perm[b].
    """

    def __init__(self, P: FlatManifoldPresentation, limit: int = STRUCTURED_SIZE_LIMIT):
        self.presentation = P
        self.blocks = P.block_dims
        self.cells = _Interner()
        nb = len(self.blocks)
        ident = tuple(self.cells.add(AffineTorusIsometry.identity(b)) for b in self.blocks)
        self.identity = (tuple(range(nb)), ident)
        self.gens = []
        for g in P.generators:
            perm, parts = _split_blocks(g, self.blocks)
            self.gens.append((perm, tuple(self.cells.add(p) for p in parts)))
        self.elements = self._close(limit)

    def mul(self, x, y):
        """x after y."""
        p1, f1 = x
        p2, f2 = y
        comp = self.cells.compose
        return tuple(p2[p1[b]] for b in range(len(p1))), tuple(comp(f1[b], f2[p1[b]]) for b in range(len(p1)))

    def _close(self, limit):
        seen = {self.identity}
        out = [self.identity]
        queue = deque(out)
        while queue:
            g = queue.popleft()
            for s in self.gens:
                h = self.mul(g, s)
                if h not in seen:
                    seen.add(h)
                    out.append(h)
                    queue.append(h)
                    if len(out) > limit:
                        raise GroupTooLarge(f"group exceeds {limit} elements")
        return out

    def linear_key(self, x):
        return x[0], tuple(self.cells.linear_id[i] for i in x[1])

    def cycle_composites(self, x) -> Iterator[int]:
        perm, ids = x
        done = [False] * len(perm)
        for b0 in range(len(perm)):
            if done[b0]:
                continue
            acc = None
            b = b0
            while not done[b]:
                done[b] = True
                acc = ids[b] if acc is None else self.cells.compose(acc, ids[b])
                b = perm[b]
            yield acc

    def has_fixed_point(self, x) -> bool:
        return all(self.cells.fixed(c) for c in self.cycle_composites(x))

    def to_isometry(self, x) -> AffineTorusIsometry:
        perm, ids = x
        starts = [0]
        for b in self.blocks:
            starts.append(starts[-1] + b)
        n = starts[-1]
        L = [[0] * n for _ in range(n)]
        t = [Fraction(0)] * n
        for b, (src, i) in enumerate(zip(perm, ids)):
            cell = self.cells.items[i]
            r0, c0 = starts[b], starts[src]
            for r in range(self.blocks[b]):
                L[r0 + r][c0:c0 + self.blocks[b]] = list(cell.linear[r])
                t[r0 + r] = cell.translation[r]
        return AffineTorusIsometry.make(L, t)

    def linear_matrix(self, x) -> list[list[int]]:
        return [list(r) for r in self.to_isometry(x).linear]

    def holonomy_keys(self) -> dict:
        """One group element per distinct linear part."""
        reps = {}
        for x in self.elements:
            reps.setdefault(self.linear_key(x), x)
        return reps

    def averaged(self, reps) -> list[list[int]]:
        """Sum of A^T A over the holonomy elements; block diagonal."""
        starts = [0]
        for b in self.blocks:
            starts.append(starts[-1] + b)
        n = starts[-1]
        counts: Counter = Counter()
        for perm, lin in reps:
            for b, src in enumerate(perm):
                counts[src, lin[b]] += 1
        lin_mats = {}
        for i, g in enumerate(self.cells.items):
            lin_mats.setdefault(self.cells.linear_id[i], g.linear)
        S = [[0] * n for _ in range(n)]
        for (c, lid), k in counts.items():
            A = lin_mats[lid]
            AtA = mat_mul(transpose(A), A)
            c0 = starts[c]
            for i in range(self.blocks[c]):
                for j in range(self.blocks[c]):
                    S[c0 + i][c0 + j] += k * AtA[i][j]
        return S


@dataclass
class HolonomyData:
    dim: int
    order: int
    group_order: int
    b1: int
    orientable: bool
    generators: list[list[list[int]]]
    averaged: list[list[int]]
    group: BlockGroup = field(repr=False)

    @cached_property
    def elements(self) -> list[list[list[int]]]:
        """Linear parts of the holonomy group, one per element."""
        return [self.group.linear_matrix(x) for x in self.group.holonomy_keys().values()]

    def sample_elements(self, count: int, seed: int = 0) -> list[list[list[int]]]:
        """Every element when the group is small, else the generators plus a seeded subset."""
        reps = list(self.group.holonomy_keys().values())
        if len(reps) <= count:
            return [self.group.linear_matrix(x) for x in reps]
        import numpy as np

        idx = np.random.default_rng(seed).choice(len(reps), size=count, replace=False)
        return self.generators + [self.group.linear_matrix(reps[i]) for i in sorted(idx)]

    def to_json(self) -> dict:
        return {"dim": self.dim, "order": self.order, "group_order": self.group_order,
                "b1": self.b1, "orientable": self.orientable}


def betti_one(dim: int, linear_gens: Iterable[Sequence[Sequence[int]]]) -> int:
    rows = []
    for A in linear_gens:
        rows.extend([A[i][j] - (i == j) for j in range(dim)] for i in range(dim))
    return dim - rank(rows) if rows else dim


def verify_flat_manifold(P: FlatManifoldPresentation, limit: int = STRUCTURED_SIZE_LIMIT) -> HolonomyData:
    """Close the group, check every non-identity element acts freely, read off holonomy data."""
    G = BlockGroup(P, limit)
    for x in G.elements:
        if x == G.identity:
            continue
        if G.has_fixed_point(x):
            raise NotFreeError(G.to_isometry(x), P.label)
    reps = G.holonomy_keys()
    lin_gens = []
    for g in P.generators:
        if not g.is_translation() and [list(r) for r in g.linear] not in lin_gens:
            lin_gens.append([list(r) for r in g.linear])
    return HolonomyData(
        dim=P.dim,
        order=len(reps),
        group_order=len(G.elements),
        b1=betti_one(P.dim, lin_gens),
        orientable=all(det_int(A) == 1 for A in lin_gens),
        generators=lin_gens,
        averaged=G.averaged(reps),
        group=G,
    )
