import pytest

from flatforms.bieberbach import BlockGroup, verify_flat_manifold
from flatforms.classify import enumerate_classes
from flatforms.constructions import (
    FamilySpec,
    SpecError,
    _triples,
    build,
    build_C,
    build_C3_full,
    build_E,
    build_E_cover,
    build_wtC3,
    companion,
    double_cover,
    hantzsche_wendt,
    hw_extension,
    hw_tau,
    mapping_torus,
    parse_family,
    PHI7,
    PHI15,
)
from flatforms.linalg import identity, mat_mul
from flatforms.qform import projectively_equivalent


def _facts(P):
    H = verify_flat_manifold(P)
    return H.dim, H.order, H.b1, H.orientable


def _normalizes(cd):
    """Conjugating the cover group by the deck map stays inside the cover group."""
    G = BlockGroup(cd.cover)
    elems = {G.to_isometry(x) for x in G.elements}
    inv = cd.deck.inverse()
    return all(cd.deck.compose(g).compose(inv) in elems for g in cd.cover.generators)


def test_hw_and_tau():
    assert _facts(hantzsche_wendt()) == (3, 4, 0, True)
    tau = hw_tau()
    assert tau.order() == 3 and tau.det() == 1


@pytest.mark.parametrize("a, orientable", [((1, 1, 1), True), ((2, 1, 1), False), ((3, 1, 1), True),
                                           ((1, 2, 2), False), ((2, 2, 2), True)])
def test_hw_extensions(a, orientable):
    dim, order, b1, ori = _facts(hw_extension(*a))
    assert (dim, order, b1, ori) == (sum(a), 4, 0, orientable)


def test_double_covers_normalized():
    for a in [(1, 2, 2), (2, 2, 1), (3, 1, 1)]:
        cd = double_cover(hw_extension(*a), orientable=True)
        assert cd.degree == 2 and _normalizes(cd)
        H = verify_flat_manifold(cd.cover)
        assert H.orientable and H.order == 2


@pytest.mark.parametrize("k, orientable", [(3, False), (4, False), (5, True), (6, True), (8, True)])
def test_C_family(k, orientable):
    dim, order, b1, ori = _facts(build_C(k))
    assert (dim, order, ori) == (2 * k, 16, orientable)


def test_C_base_choices_agree():
    # every admissible base triple gives the same projective class (dims 10 and 14)
    for k in (5, 7):
        reps = []
        for t in _triples(k):
            try:
                P = build_C(k, triple=t)
            except ValueError:
                continue
            r = enumerate_classes(P, 20, 1)
            assert len(r.classes) == 1
            assert verify_flat_manifold(P).orientable
            reps.append(r.classes[0].representative)
        assert len(reps) >= 2
        assert all(projectively_equivalent(reps[0], f) for f in reps[1:])


def test_E_family():
    E, Et = build_E(3)
    H = verify_flat_manifold(E)
    assert (H.dim, H.group_order, H.orientable) == (12, 128, True)
    Ht = verify_flat_manifold(Et)
    assert Ht.b1 == 0 and Ht.group_order == 64
    assert _normalizes(build_E_cover(3))


def test_c3_family():
    assert _facts(build_wtC3(0))[:3] == (10, 9, 0)
    cd = build_C3_full(0)
    assert verify_flat_manifold(cd.base).group_order == 27
    assert _normalizes(cd)
    assert verify_flat_manifold(build_wtC3(1)).dim == 12


def test_companion_orders():
    for poly, order in ((PHI7, 7), (PHI15, 15)):
        C = companion(poly)
        M = identity(len(C))
        for k in range(1, order + 1):
            M = mat_mul(M, C)
            assert (M == identity(len(C))) == (k == order)


@pytest.mark.parametrize("k, l, order", [(1, 0, 7), (0, 1, 15), (2, 1, 105)])
def test_mapping_tori(k, l, order):
    dim, hol, b1, ori = _facts(mapping_torus(k, l))
    assert (dim, hol, b1, ori) == (6 * k + 8 * l + 1, order, 1, True)


def test_parse_round_trip():
    for text in ["hw", "S1", "torus:5", "hw_ext:2,1,1", "C:k=5", "E:k=3", "E_tilde:k=3", "wtC3:0",
                 "C3_ext:1", "F:k=0,l=0", "Ep:k=0", "mt:k=2,l=0", "product:(S1, E:k=3)",
                 "product:(mt:k=1,l=0, E:k=5)"]:
        spec = parse_family(text)
        assert parse_family(str(spec)) == spec
    assert parse_family("F:k=0,l=0").dim == 35
    assert parse_family("Ep:k=0").dim == 32
    assert parse_family("product:(C:k=3, wtC3:0)").dim == 16
    assert isinstance(parse_family("hw"), FamilySpec)


@pytest.mark.parametrize("bad", ["", "foo", "C:k=2", "C:j=5", "hw_ext:0,1,1", "product:(hw)", "product:hw,hw",
                                 "torus:0", "mt:k=0,l=0", "C:k=x"])
def test_parse_errors(bad):
    with pytest.raises(SpecError):
        parse_family(bad)


def test_build_product_blocks():
    P = build("product:(hw, S1)")
    assert P.dim == 4 and P.label == "product:(hw, S1)"
    assert verify_flat_manifold(P).b1 == 1
