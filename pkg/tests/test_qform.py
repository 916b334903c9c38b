import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from flatforms.exactnum import hilbert_symbol, prime_set, squarefree_part
from flatforms.qform import (
    DegenerateFormError,
    FormFingerprint,
    QuadForm,
    diagonalize,
    direct_sum,
    discriminant,
    hasse_witt,
    hasse_witt_pairwise,
    lorentzian_form,
    projective_fingerprint,
    projective_scaling,
    projectively_equivalent,
    projectively_equivalent_by_invariants,
    rationally_equivalent,
    realization_test,
)
from flatforms.linalg import det_int
from oracles import brute_pairwise_hasse

diag = QuadForm.diagonal
entry = st.integers(1, 30).flatmap(lambda a: st.sampled_from([a, -a]))


def random_unimodularish(rng, n, lo=-2, hi=2):
    while True:
        C = [[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)]
        for i in range(n):
            C[i][i] += 3 * rng.choice([-1, 1])
        if det_int(C) != 0:
            return C


def random_pd(rng, n):
    entries = [Fraction(rng.randint(1, 12), rng.randint(1, 3)) for _ in range(n)]
    return diag(entries).transform(random_unimodularish(rng, n))


def test_diagonalize_examples():
    hyp = QuadForm(((0, 1), (1, 0)))
    a = diagonalize(hyp)
    # entries come out as <2, -1/2>, which is <1, -1> up to equivalence
    assert rationally_equivalent(diag(a), diag([1, -1]))
    assert squarefree_part(a[0] * a[1]) == -1
    assert diagonalize(QuadForm.identity(4)) == [1, 1, 1, 1]
    assert diagonalize(diag([3, 5])) == [3, 5]
    with pytest.raises(DegenerateFormError):
        QuadForm(((1, 1), (1, 1)))


def test_zero_leading_entry_needs_coupling():
    f = QuadForm(((0, 0, 1), (0, 2, 0), (1, 0, 0)))
    a = diagonalize(f)
    assert squarefree_part(a[0] * a[1] * a[2]) == squarefree_part(f.det)
    assert f.signature == (2, 1)
    for p in (2, 3, 5):
        assert f.hasse_witt(p) == hasse_witt_pairwise(a, p)


def test_discriminant_examples():
    assert discriminant(diag([3, 3, 3, 1, 1, 1])) == 3
    assert discriminant(diag([1, -1])) == -1


def test_hasse_witt_examples():
    for n in (2, 4, 6, 8, 10, 12):
        f = diag([1] * (n // 2) + [-1] * (n // 2))
        assert hasse_witt(f, 2) == (-1) ** (n * (n - 2) // 8)
    assert hasse_witt(diag([1] * 10 + [-1] * 0), 2) == 1
    assert hasse_witt(diag([3, 3]), 2) == -1
    for p in (2, 3, 5, 7):
        assert hasse_witt(QuadForm.identity(5), p) == 1


@settings(max_examples=60)
@given(st.lists(entry, min_size=1, max_size=5), st.sampled_from([2, 3, 5, 7]))
def test_hasse_witt_matches_brute_force(entries, p):
    assert hasse_witt(diag(entries), p) == brute_pairwise_hasse(entries, p)


def test_direct_sum_examples():
    f = direct_sum(diag([3]), diag([3]))
    assert f == diag([3, 3])
    assert f.disc == 1 and f.hasse_witt(2) == -1
    g = direct_sum(diag([1]), diag([-1]))
    assert g.disc == -1 and all(e == 1 for _, e in g.fingerprint.eps)
    h = diag([2, 7])
    assert direct_sum(h, QuadForm(())) == h


def test_sum_identities_on_500_pairs():
    rng = random.Random(11)
    for _ in range(500):
        a = [rng.choice([-1, 1]) * rng.randint(1, 30) for _ in range(rng.randint(1, 4))]
        b = [rng.choice([-1, 1]) * rng.randint(1, 30) for _ in range(rng.randint(1, 4))]
        f, g = diag(a), diag(b)
        s = direct_sum(f, g)
        assert s.disc == squarefree_part(f.disc * g.disc)
        for p in prime_set(a + b):
            assert s.hasse_witt(p) == f.hasse_witt(p) * g.hasse_witt(p) * hilbert_symbol(f.disc, g.disc, p)


def test_rational_equivalence_examples():
    for m in (2, 3, 5, 6, 7, 30):
        assert rationally_equivalent(diag([m, -m]), diag([1, -1]))
    f = diag([2, 5, 7])
    assert rationally_equivalent(f, f)
    assert not rationally_equivalent(diag([1, 1]), diag([3, 3]))


def test_fingerprint_invariant_under_basis_change():
    rng = random.Random(3)
    for _ in range(40):
        n = rng.randint(1, 6)
        f = diag([rng.choice([-1, 1]) * Fraction(rng.randint(1, 20), rng.randint(1, 4)) for _ in range(n)])
        g = f.transform(random_unimodularish(rng, n))
        assert g.fingerprint == f.fingerprint
        assert rationally_equivalent(f, g)


def test_invariants_independent_of_order():
    rng = random.Random(5)
    for _ in range(30):
        n = rng.randint(2, 6)
        f = random_pd(rng, n) if rng.random() < 0.5 else diag(
            [rng.choice([-1, 1]) * rng.randint(1, 20) for _ in range(n)]).transform(random_unimodularish(rng, n))
        primes = f.prime_set
        seen = set()
        for _ in range(3):
            order = list(range(n))
            rng.shuffle(order)
            a = diagonalize(f, order)
            seen.add((squarefree_part(a[0] if n == 1 else Fraction(1) * __import__("math").prod(a)),
                      tuple(hasse_witt_pairwise(a, p) for p in primes)))
        assert len(seen) == 1
        d, eps = seen.pop()
        assert d == f.disc
        assert eps == tuple(f.hasse_witt(p) for p in primes)


def test_projective_examples():
    assert projectively_equivalent(diag([1, 1]), diag([3, 3]))
    assert projective_scaling(diag([1, 1]), diag([3, 3])) == 3
    assert not projectively_equivalent(diag([1, 1]), diag([1, 3]))
    # n = 2 mod 4 representatives for p = 3 and p = 7 differ by discriminant
    f3 = diag([3] + [1] * 9)
    f7 = diag([7] + [1] * 9)
    assert not projectively_equivalent(f3, f7)
    with pytest.raises(ValueError):
        projectively_equivalent(diag([1]), diag([1, 1]))


def test_decider_agreement_200_pairs():
    rng = random.Random(2024)
    agree_true = 0
    for _ in range(200):
        n = rng.randint(2, 8)
        f = random_pd(rng, n)
        r = rng.random()
        if r < 0.4:
            m = Fraction(rng.randint(1, 15), rng.randint(1, 4))
            g = f.scale(m).transform(random_unimodularish(rng, n))
        elif r < 0.7:
            # perturb one diagonal entry of an equivalent form
            a = diagonalize(f)
            a[rng.randrange(n)] *= rng.choice([2, 3, 5, 7])
            g = diag(a)
        else:
            g = random_pd(rng, n)
        by_search = projective_scaling(f, g) is not None
        by_inv = projectively_equivalent_by_invariants(f, g)
        assert by_search == by_inv
        assert projectively_equivalent(f, g) == by_search
        agree_true += by_search
    assert agree_true >= 60


def test_equivalence_relation_spot_checks():
    rng = random.Random(9)
    for _ in range(40):
        n = rng.randint(2, 5)
        f = random_pd(rng, n)
        g = f.scale(rng.randint(1, 9)).transform(random_unimodularish(rng, n)) if rng.random() < 0.5 else random_pd(rng, n)
        h = g.scale(rng.randint(1, 9)) if rng.random() < 0.5 else random_pd(rng, n)
        assert projectively_equivalent(f, f)
        assert projectively_equivalent(f, g) == projectively_equivalent(g, f)
        if projectively_equivalent(f, g) and projectively_equivalent(g, h):
            assert projectively_equivalent(f, h)


@settings(max_examples=40)
@given(st.integers(1, 6), st.integers(1, 30), st.integers(1, 30), st.randoms(use_true_random=False))
def test_scaling_invariance(n, num, den, rnd):
    f = random_pd(rnd, n)
    assert projectively_equivalent(f, f.scale(Fraction(num, den)))


def test_projective_fingerprint_cases():
    assert projective_fingerprint(diag([3] * 5)).residue == 1
    # rank 3: the twisted datum sees <1,1,3> vs <1,1,1> at 3
    assert projective_fingerprint(diag([1, 1, 3])) != projective_fingerprint(diag([1, 1, 1]))
    with pytest.raises(ValueError):
        projective_fingerprint(diag([1, -1]))


def test_realization_examples():
    q3 = lorentzian_form(10, [3])
    assert q3.signature == (11, 1)
    assert realization_test(diag([3] + [1] * 9), q3)
    assert realization_test(QuadForm.identity(7), lorentzian_form(7))
    assert not realization_test(QuadForm.identity(10), q3)
    with pytest.raises(ValueError):
        realization_test(QuadForm.identity(3), QuadForm.identity(5))


def test_json_roundtrip():
    f = QuadForm(((Fraction(1, 2), 1), (1, 5)))
    data = f.to_json()
    assert data["gram"][0][0] == "1/2"
    assert QuadForm.from_json(data) == f
    fp = f.fingerprint
    assert FormFingerprint.from_json(fp.to_json()) == fp


def test_scaling_solver_matches_bounded_search():
    from oracles import brute_projective_scaling

    rng = random.Random(77)
    for _ in range(60):
        n = rng.randint(1, 5)
        f = random_pd(rng, n)
        g = f.scale(rng.randint(1, 30)).transform(random_unimodularish(rng, n)) if rng.random() < 0.5 else random_pd(rng, n)
        m = projective_scaling(f, g)
        brute = brute_projective_scaling(f, g, 400)
        if brute is not None:
            assert m is not None
        if m is not None:
            assert rationally_equivalent(f.scale(m), g)
        else:
            assert brute is None


def test_scaling_may_need_primes_outside_the_prime_sets():
    # both forms have d = 14 and prime set {2, 7}; every working m involves another prime
    f = QuadForm(((3, -2), (-2, 6)))
    g = diag([1, Fraction(7, 2)])
    assert set(f.prime_set) | set(g.prime_set) == {2, 7}
    for m in (1, 2, 7, 14):
        assert not rationally_equivalent(f.scale(m), g)
    m = projective_scaling(f, g)
    assert m is not None and m % 7 and m % 2
    assert projectively_equivalent_by_invariants(f, g)
    assert projectively_equivalent(f, g)
