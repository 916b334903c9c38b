"""Hilbert symbols and local invariants of a few small forms."""

from flatforms.exactnum import INF, hilbert_symbol
from flatforms.qform import QuadForm, projective_scaling

print("Hilbert symbols (a, b)_p")
pairs = [(-1, -1), (2, 3), (3, 3), (5, 7), (-3, 7)]
places = [2, 3, 5, 7, INF]
print(f"{'(a, b)':>10} " + " ".join(f"{str(p):>4}" for p in places))
for a, b in pairs:
    print(f"{str((a, b)):>10} " + " ".join(f"{hilbert_symbol(a, b, p):>4}" for p in places))

print()
for entries in ([1, 1, 1], [3, 3, 1], [1, 1, 3], [2, 5, 7, 11]):
    f = QuadForm.diagonal(entries)
    fp = f.fingerprint
    minus = [p for p, e in fp.eps if e == -1]
    print(f"<{', '.join(map(str, entries))}>: disc {fp.disc}, eps = -1 at {minus or 'no prime'}")

f = QuadForm(((3, -2), (-2, 6)))
g = QuadForm.diagonal([1, "7/2"])
m = projective_scaling(f, g)
print(f"\n{m} * [[3,-2],[-2,6]] is rationally equivalent to <1, 7/2>")
