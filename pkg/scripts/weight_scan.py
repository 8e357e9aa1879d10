"""Partial Besov sums of <x>^a as the box grows."""
import argparse

from hglk.besov import doubling_increments, weight_scan


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--a", type=float, nargs="+", default=[0.7, 1.0])
    ap.add_argument("--L", type=float, nargs="+", default=[64.0, 128.0, 256.0, 512.0])
    args = ap.parse_args()
    rows = weight_scan(args.a, args.L)
    for r in rows:
        print(f"a={r.a:.2f} L={r.L:6.0f} value={r.besov_value:.4f} tail={r.partial_sum_tail:.4f} {r.verdict}")
    for a in args.a:
        inc = doubling_increments([r for r in rows if r.a == a])
        print(f"a={a:.2f} per-octave increments: " + " ".join(f"{x:.4f}" for x in inc))


if __name__ == "__main__":
    main()
