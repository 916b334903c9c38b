"""Property suites over the number theory and form layers, runnable without pytest."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .exactnum import INF, hilbert_symbol, prime_set, squarefree_part
from .linalg import det_int
from .qform import (
    QuadForm,
    diagonalize,
    direct_sum,
    projective_scaling,
    projectively_equivalent,
    projectively_equivalent_by_invariants,
    rationally_equivalent,
)


@dataclass
class SuiteResult:
    name: str
    passed: int
    total: int

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def to_json(self) -> dict:
        return {"suite": self.name, "passed": self.passed, "total": self.total, "ok": self.ok}


def random_unimodularish(rng: random.Random, n: int) -> list[list[int]]:
    """A random invertible integer matrix with a dominant diagonal."""
    while True:
        C = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)]
        for i in range(n):
            C[i][i] += 3 * rng.choice([-1, 1])
        if det_int(C) != 0:
            return C


def random_pd(rng: random.Random, n: int) -> QuadForm:
    entries = [Fraction(rng.randint(1, 12), rng.randint(1, 3)) for _ in range(n)]
    return QuadForm.diagonal(entries).transform(random_unimodularish(rng, n))


def product_formula(seed: int = 1, count: int = 1000,
                    hilbert: Callable | None = None) -> SuiteResult:
    hilbert = hilbert or hilbert_symbol
    rng = random.Random(seed)
    passed = 0
    for _ in range(count):
        a = rng.choice([-1, 1]) * rng.randint(1, 10**4)
        b = rng.choice([-1, 1]) * rng.randint(1, 10**4)
        prod = hilbert(a, b, INF)
        for p in prime_set([a, b]):
            prod *= hilbert(a, b, p)
        passed += prod == 1
    return SuiteResult("product formula", passed, count)


def sum_of_forms(seed: int = 1, count: int = 500) -> SuiteResult:
    rng = random.Random(seed)
    passed = 0
    for _ in range(count):
        a = [rng.choice([-1, 1]) * rng.randint(1, 30) for _ in range(rng.randint(1, 4))]
        b = [rng.choice([-1, 1]) * rng.randint(1, 30) for _ in range(rng.randint(1, 4))]
        f, g = QuadForm.diagonal(a), QuadForm.diagonal(b)
        s = direct_sum(f, g)
        ok = s.disc == squarefree_part(f.disc * g.disc)
        for p in prime_set(a + b):
            ok = ok and s.hasse_witt(p) == f.hasse_witt(p) * g.hasse_witt(p) * hilbert_symbol(f.disc, g.disc, p)
        passed += ok
    return SuiteResult("sum of forms", passed, count)


def hyperbolic_equivalence(values=(2, 3, 5, 6, 7, 30)) -> SuiteResult:
    h = QuadForm.diagonal([1, -1])
    passed = sum(rationally_equivalent(QuadForm.diagonal([m, -m]), h) for m in values)
    return SuiteResult("<m,-m> ~ <1,-1>", passed, len(values))


def decider_agreement(seed: int = 1, count: int = 200) -> SuiteResult:
    """Exact scaling solver against the local-invariant fingerprint on random
    positive definite pairs of rank 2 to 8, a good share of them equivalent."""
    rng = random.Random(seed)
    passed = 0
    for _ in range(count):
        n = rng.randint(2, 8)
        f = random_pd(rng, n)
        r = rng.random()
        if r < 0.4:
            g = f.scale(Fraction(rng.randint(1, 15), rng.randint(1, 4))).transform(random_unimodularish(rng, n))
        elif r < 0.7:
            a = diagonalize(f)
            a[rng.randrange(n)] *= rng.choice([2, 3, 5, 7])
            g = QuadForm.diagonal(a)
        else:
            g = random_pd(rng, n)
        by_solver = projective_scaling(f, g) is not None
        passed += by_solver == projectively_equivalent_by_invariants(f, g) == projectively_equivalent(f, g)
    return SuiteResult("decider agreement", passed, count)


def run_all(seed: int = 1) -> list[SuiteResult]:
    return [
        product_formula(seed),
        sum_of_forms(seed),
        hyperbolic_equivalence(),
        decider_agreement(seed),
    ]
