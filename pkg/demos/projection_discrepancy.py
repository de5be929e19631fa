"""Show how plain Halton points degrade on high coordinate pairs.

Computes the L2 star discrepancy of two-dimensional projections of the first
1000 Halton and generalized Halton points for a few coordinate pairs.

    python3 demos/projection_discrepancy.py
"""
from qrcopula import SequenceSpec, generate, l2_star_discrepancy

PAIRS = [(1, 2), (5, 6), (12, 13), (20, 21), (30, 31)]


def main():
    k = max(j for pair in PAIRS for j in pair)
    P = {kind: generate(SequenceSpec(kind, k), 1000).points for kind in ("halton", "ghalton")}
    print(f"{'coords':>8} {'halton':>10} {'ghalton':>10} {'ratio':>7}")
    for i, j in PAIRS:
        h = l2_star_discrepancy(P["halton"][:, [i - 1, j - 1]])
        g = l2_star_discrepancy(P["ghalton"][:, [i - 1, j - 1]])
        print(f"{i:>3},{j:<4} {h:10.5f} {g:10.5f} {h / g:7.1f}")


if __name__ == "__main__":
    main()
