"""Pairs of flat manifolds whose holonomy forms never meet projectively."""

import sys

from flatforms.classify import enumerate_classes, pair_verdict
from flatforms.constructions import build

samples = int(sys.argv[1]) if len(sys.argv) > 1 else 100

for a, b in [("wtC3:0", "C:k=5"), ("mt:k=2,l=0", "product:(S1, E:k=3)"),
             ("product:(C:k=3, wtC3:0)", "C:k=8"), ("hw", "hw")]:
    ra = enumerate_classes(build(a), samples, seed=1)
    rb = ra if a == b else enumerate_classes(build(b), samples, seed=1)
    pr = pair_verdict(ra, rb)
    how = f" via {pr.invariant} {pr.witness}" if pr.invariant else ""
    print(f"n={pr.dim:2}  {a} vs {b}: {pr.verdict}{how}")
