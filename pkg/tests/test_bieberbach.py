import random
from fractions import Fraction

import pytest

from flatforms.bieberbach import (
    AffineTorusIsometry,
    BlockGroup,
    FlatManifoldPresentation,
    GroupTooLarge,
    NotFreeError,
    betti_one,
    generate_group,
    has_fixed_point,
    product,
    toral_extension,
    torus,
    verify_flat_manifold,
)
from flatforms.constructions import hantzsche_wendt, hw_extension
from oracles import grid_fixed_point

Iso = AffineTorusIsometry.make


def _signed_perm(rng, n):
    perm = list(range(n))
    rng.shuffle(perm)
    A = [[0] * n for _ in range(n)]
    for i, j in enumerate(perm):
        A[i][j] = rng.choice([-1, 1])
    return A


def test_compose_inverse_power():
    g = Iso([[0, -1], [1, 0]], [Fraction(1, 2), 0])
    assert (g @ g.inverse()).is_identity()
    assert g.power(4).is_identity() or g.order() > 4
    assert g.power(g.order()).is_identity()
    assert g.power(-1) == g.inverse()
    h = Iso([[1, 0], [0, -1]], [Fraction(1, 2), 0])
    x = [Fraction(1, 3), Fraction(1, 5)]
    lhs = g.compose(h).apply(x)
    rhs = g.apply(h.apply(x))
    assert [a % 1 for a in lhs] == [a % 1 for a in rhs]


def test_translations_reduced_mod_one():
    g = Iso([[1]], [Fraction(3, 2)])
    assert g.translation == (Fraction(1, 2),)
    assert Iso([[1]], [1]).is_identity()


def test_fixed_point_examples():
    # glide reflection of the Klein bottle acts freely, the plain reflection does not
    assert not has_fixed_point(Iso([[1, 0], [0, -1]], [Fraction(1, 2), 0]))
    assert has_fixed_point(Iso([[1, 0], [0, -1]], [0, Fraction(1, 2)]))
    assert has_fixed_point(Iso([[-1, 0], [0, -1]], [Fraction(1, 2), Fraction(1, 3)]))
    assert not has_fixed_point(AffineTorusIsometry.translation_by([Fraction(1, 2), 0]))


def test_fixed_point_matches_grid_search():
    rng = random.Random(4)
    for _ in range(150):
        n = rng.randint(1, 4)
        A = _signed_perm(rng, n)
        t = [Fraction(rng.randint(0, 3), 4) for _ in range(n)]
        g = Iso(A, t)
        # fixed points of a signed permutation with translations in (1/4)Z live on the (1/8) grid
        assert has_fixed_point(g) == grid_fixed_point(g.linear, g.translation, 8)


def test_fixed_point_grid_dim_six():
    rng = random.Random(8)
    for _ in range(10):
        A = _signed_perm(rng, 6)
        t = [Fraction(rng.randint(0, 1), 2) for _ in range(6)]
        g = Iso(A, t)
        assert has_fixed_point(g) == grid_fixed_point(g.linear, g.translation, 4)


def test_hw_group():
    P = hantzsche_wendt()
    H = verify_flat_manifold(P)
    assert (H.dim, H.order, H.b1, H.orientable) == (3, 4, 0, True)


def test_block_group_matches_generic_closure():
    for P in (hantzsche_wendt(), hw_extension(2, 1, 1), product(hantzsche_wendt(), torus(1))):
        G = BlockGroup(P)
        generic = generate_group(P.generators)
        assert len(G.elements) == len(generic)
        assert {G.to_isometry(x) for x in G.elements} == set(generic)


def test_not_free_detected():
    P = FlatManifoldPresentation(2, (Iso([[-1, 0], [0, -1]]),), "rot")
    with pytest.raises(NotFreeError):
        verify_flat_manifold(P)


def test_group_guard():
    gens = [Iso(A) for A in ([[0, 1, 0], [1, 0, 0], [0, 0, 1]], [[0, 1, 0], [0, 0, 1], [1, 0, 0]], [[-1, 0, 0], [0, 1, 0], [0, 0, 1]])]
    assert len(generate_group(gens)) == 48
    with pytest.raises(GroupTooLarge):
        generate_group(gens, limit=10)


def test_product_and_extension_betti():
    hw = hantzsche_wendt()
    P = product(hw, torus(2))
    H = verify_flat_manifold(P)
    assert (H.dim, H.b1, H.order) == (5, 2, 4)
    # a nontrivial character adds no invariant vector, the trivial one adds one
    ext = toral_extension(hw, [[[-1]], [[1]]])
    He = verify_flat_manifold(ext)
    assert He.dim == 4 and He.b1 == 0 and not He.orientable
    triv = toral_extension(hw, [[[1]], [[1]]])
    assert verify_flat_manifold(triv).b1 == 1


def test_extension_rejects_non_homomorphism():
    hw = hantzsche_wendt()
    with pytest.raises(ValueError):
        toral_extension(hw, [[[0, 1], [1, 0]], [[0, -1], [1, 0]]])


def test_betti_counts_invariant_vectors():
    assert betti_one(3, []) == 3
    assert betti_one(2, [[[1, 0], [0, -1]]]) == 1


def test_json_round_trip():
    P = hw_extension(2, 1, 1)
    Q = FlatManifoldPresentation.from_json(P.to_json())
    assert Q == P
    g = P.generators[0]
    assert AffineTorusIsometry.from_json(g.to_json()) == g


def test_averaged_is_invariant():
    H = verify_flat_manifold(hw_extension(1, 2, 1))
    for A in H.elements:
        n = H.dim
        AtSA = [[sum(A[k][i] * H.averaged[k][l] * A[l][j] for k in range(n) for l in range(n))
                 for j in range(n)] for i in range(n)]
        assert AtSA == H.averaged
    assert len(H.elements) == H.order
