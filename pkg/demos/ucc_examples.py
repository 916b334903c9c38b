"""Sample holonomy forms of three UCC candidates and compare with Lorentzian forms."""

import sys

from flatforms.classify import enumerate_classes, ucc_verdict
from flatforms.constructions import build
from flatforms.qform import lorentzian_form

samples = int(sys.argv[1]) if len(sys.argv) > 1 else 100

for spec, head in [("wtC3:0", (3,)), ("C:k=5", (3, 3)), ("E:k=3", ())]:
    P = build(spec)
    report = enumerate_classes(P, samples, seed=1)
    fp = report.classes[0].fingerprint
    q = lorentzian_form(P.dim, head)
    ok = ucc_verdict(report, q, "q")
    print(f"{spec:8} dim {P.dim:2}  classes {len(report.classes)}  stable {report.stable}  disc {fp.disc}")
    print(f"         realised by <{', '.join(map(str, head + (1,) * 3))}, ..., -1>: {ok}")
