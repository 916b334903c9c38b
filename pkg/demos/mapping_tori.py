"""The 2-adic datum of the order-7 / order-15 mapping tori against (-1)^((n^2-1)/8)."""

from flatforms.classify import mapping_torus_fingerprint

print(f"{'(k, l)':>8} {'n':>3} {'n mod 8':>7} {'sampled':>8} {'formula':>8}")
for k, l in [(1, 0), (0, 1), (2, 0), (1, 1), (3, 0), (2, 1)]:
    n = 6 * k + 8 * l + 1
    value = mapping_torus_fingerprint(k, l, samples=30)
    print(f"{str((k, l)):>8} {n:>3} {n % 8:>7} {value:>+8d} {(-1) ** ((n * n - 1) // 8):>+8d}")
