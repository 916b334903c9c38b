from fractions import Fraction

import pytest

from flatforms.bieberbach import AffineTorusIsometry, FlatManifoldPresentation, verify_flat_manifold
from flatforms.classify import (
    bucket_forms,
    check_invariance,
    enumerate_classes,
    invariant_form_space,
    mapping_torus_fingerprint,
    pair_verdict,
    sample_holonomy_forms,
    separating_invariants,
    sparse_to_dense,
    ucc_verdict,
)
from flatforms.constructions import build, build_F, build_wtC3
from flatforms.exactnum import hilbert_symbol
from flatforms.qform import QuadForm, direct_sum, lorentzian_form, rationally_equivalent


def _space(text):
    H = verify_flat_manifold(build(text))
    return H, invariant_form_space(H)


def test_space_hw_is_diagonal():
    _, sp = _space("hw")
    assert len(sp) == 3
    assert sorted(sparse_to_dense(b, 3) for b in sp.basis) == sorted(
        [[[int(i == j == k) for j in range(3)] for i in range(3)] for k in range(3)])
    for f in sample_holonomy_forms(sp, 20, 3):
        assert f.is_diagonal() and all(x > 0 for x in f.pivots)


@pytest.mark.parametrize("n", [1, 2, 4])
def test_space_trivial_group(n):
    _, sp = _space(f"torus:{n}")
    assert len(sp) == n * (n + 1) // 2


def test_space_rotation():
    rot = AffineTorusIsometry.make([[0, -1, 0], [1, 0, 0], [0, 0, 1]], [0, 0, Fraction(1, 4)])
    H = verify_flat_manifold(FlatManifoldPresentation(3, (rot,), "rot"))
    sp = invariant_form_space(H)
    # the rotation plane contributes multiples of the identity, the axis one more
    assert len(sp) == 2
    for f in sample_holonomy_forms(sp, 10, 1):
        assert f.gram[0][0] == f.gram[1][1] and f.gram[0][1] == 0 and f.gram[0][2] == 0


def test_samples_are_invariant_and_deterministic():
    H, sp = _space("hw_ext:2,1,2")
    a = sample_holonomy_forms(sp, 15, 7)
    b = sample_holonomy_forms(sp, 15, 7)
    assert a == b
    assert sample_holonomy_forms(sp, 5, 7) == a[:5]
    for f in a:
        assert f.is_positive_definite()
        for A in H.elements:
            n = H.dim
            G = f.gram
            assert [[sum(A[k][i] * G[k][l] * A[l][j] for k in range(n) for l in range(n)) for j in range(n)]
                    for i in range(n)] == [list(r) for r in G]
    check_invariance(H, sp)


def test_sample_count_must_be_positive():
    _, sp = _space("hw")
    with pytest.raises(ValueError):
        sample_holonomy_forms(sp, 0, 1)


def test_torus_splits_and_hw_not_ucc():
    r = enumerate_classes(build("torus:2"), 60, 1)
    assert len(r.classes) >= 2 and not r.ucc_candidate
    r = enumerate_classes(build("hw"), 60, 1)
    assert len(r.classes) >= 2


def test_class_representatives_pairwise_inequivalent():
    r = enumerate_classes(build("hw"), 40, 2)
    from flatforms.qform import projectively_equivalent

    reps = [c.representative for c in r.classes]
    for i in range(len(reps)):
        for j in range(i):
            assert not projectively_equivalent(reps[i], reps[j])
    assert sum(c.count for c in r.classes) == 40


def test_E_samples_split_into_four_equal_blocks():
    _, sp = _space("E:k=3")
    for f in sample_holonomy_forms(sp, 12, 1):
        G = f.gram
        assert all(G[i][j] == 0 for i in range(12) for j in range(12) if i // 3 != j // 3)
        h = f.block(0, 3)
        assert all(rationally_equivalent(h, f.block(3 * b, 3 * b + 3)) for b in range(1, 4))


def test_E_single_class_all_eps_one():
    r = enumerate_classes(build("E:k=3"), 40, 1)
    assert r.ucc_candidate and r.stable
    fp = r.classes[0].fingerprint
    assert fp.disc == 1 and all(e == 1 for _, e in fp.eps)
    assert ucc_verdict(r, lorentzian_form(12))
    assert not ucc_verdict(r, lorentzian_form(12, (3,)))


def test_product_forms_are_block_diagonal_and_obey_sum_rule():
    H, sp = _space("product:(hw, hw_ext:1,2,1)")
    for f in sample_holonomy_forms(sp, 20, 4):
        G = f.gram
        assert all(G[i][j] == 0 for i in range(3) for j in range(3, 7))
        g, h = f.block(0, 3), f.block(3, 7)
        assert direct_sum(g, h) == f
        for p in sorted(set(f.prime_set) | {2, 3}):
            assert f.hasse_witt(p) == g.hasse_witt(p) * h.hasse_witt(p) * hilbert_symbol(g.disc, h.disc, p)


@pytest.mark.parametrize("m", [0, 1, 2])
def test_mod_3_law_on_wtC3(m):
    H, sp = _space(f"wtC3:{m}")
    n = H.dim
    for f in sample_holonomy_forms(sp, 40, 1):
        assert f.disc == (1 if n % 4 == 0 else 3)
        # -3 is a square in Q_7 and Q_13
        assert f.hasse_witt(7) == 1 and f.hasse_witt(13) == 1


def test_eps2_not_constant_on_wtC3():
    # -3 is not a square in Q_2, so scaling by 2 flips eps_2 on this class
    _, sp = _space("wtC3:0")
    values = {f.hasse_witt(2) for f in sample_holonomy_forms(sp, 40, 1)}
    assert values == {-1, 1}


def test_wtC3_realization():
    r = enumerate_classes(build_wtC3(0), 60, 1)
    assert r.ucc_candidate and r.classes[0].fingerprint.disc == 3
    assert ucc_verdict(r, lorentzian_form(10, (3,)))
    assert not ucc_verdict(r, lorentzian_form(10))


def test_pair_verdicts():
    a = enumerate_classes(build("wtC3:0"), 40, 1)
    b = enumerate_classes(build("C:k=5"), 40, 1)
    pr = pair_verdict(a, b)
    assert pr.verdict == "disjoint" and pr.invariant == "disc" and pr.witness == (3, 1)
    hw = enumerate_classes(build("hw"), 30, 1)
    assert pair_verdict(hw, hw).verdict == "overlapping"
    with pytest.raises(ValueError):
        pair_verdict(a, hw)


def test_odd_pair_separated_by_eps2():
    a = enumerate_classes(build("mt:k=2,l=0"), 40, 1)
    b = enumerate_classes(build("product:(S1, E:k=3)"), 40, 1)
    pr = pair_verdict(a, b)
    assert pr.verdict == "disjoint" and pr.invariant == "eps_2" and pr.witness == (-1, 1)


def test_separating_invariant_names():
    assert [n for n, _ in separating_invariants(10)] == ["disc"]
    assert [n for n, _ in separating_invariants(13)][0] == "eps_2"
    assert [n for n, _ in separating_invariants(19)][0] == "twisted_eps_2"


@pytest.mark.parametrize("k, l", [(1, 0), (0, 1), (2, 0), (3, 0), (1, 1), (2, 1)])
def test_mapping_torus_law(k, l):
    n = 6 * k + 8 * l + 1
    assert mapping_torus_fingerprint(k, l, samples=20) == (-1) ** ((n * n - 1) // 8)


def test_report_json_shape():
    r = enumerate_classes(build("wtC3:0"), 10, 1)
    data = r.to_json()
    assert data["schema_version"] == 1 and data["family"] == "wtC3:0"
    assert data["classes"][0]["disc"] == 3
    assert all(isinstance(x, str) for x in data["classes"][0]["representative_diagonal"])


def test_bucket_counts():
    f = QuadForm.diagonal([1, 1])
    classes = bucket_forms([f, f.scale(3), QuadForm.diagonal([1, 3])])
    assert sorted(c.count for c in classes) == [1, 2]


@pytest.mark.long_running
def test_F_law_dim_39():
    P = build_F(1, 0)
    H = verify_flat_manifold(P)
    sp = invariant_form_space(H)
    for f in sample_holonomy_forms(sp, 10, 1):
        for q in (2, 3, 5, 7):
            assert hilbert_symbol(f.det, -1, q) * f.hasse_witt(q) == 1
