"""Sampled operator-norm proxies of every trilinear piece across lattice truncations.

Also evaluates the two-mode input that makes the displayed mean-coupling
majorant grow like sqrt(1 + M^2).
"""

import argparse
import json
import math

import numpy as np

from eddymean.estimates import F_PIECES, SUPPLEMENTARY_PIECES, LatticeTruncation, growth_study, piece_value


def high_high_to_low(M: int) -> tuple[float, float]:
    # h = (1, -M) and m2 = M meet at k = (1, 0)
    f1 = np.zeros((2 * M + 1, 2 * M + 1))
    f2 = np.zeros(2 * M + 1)
    f1[M + 1, 0] = 1.0
    f2[2 * M] = 1.0
    tr = LatticeTruncation(M=M)
    return piece_value(tr, "mean-coupling", f1, f2), piece_value(tr, "mean-coupling-k1", f1, f2)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--M", type=int, nargs="+", default=[8, 16, 32])
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--alpha", type=float, default=0.8)
    ap.add_argument("--s", type=float, default=0.0)
    ap.add_argument("--json", help="write the table here")
    args = ap.parse_args()

    tr = LatticeTruncation(M=args.M[0], s=args.s, alpha=args.alpha, trials=args.trials)
    table = {}
    print(f"{'piece':<18}" + "".join(f"M={M:<9}" for M in args.M) + "growth(last step)")
    for piece in ("G", *F_PIECES, *SUPPLEMENTARY_PIECES):
        rep = growth_study(tr, piece, Ms=tuple(args.M))
        last = rep["max"][-1] / rep["max"][-2] - 1
        table[piece] = {"max": rep["max"], "growth_last": last}
        print(f"{piece:<18}" + "".join(f"{v:<11.4f}" for v in rep["max"]) + f"{100 * last:.1f}%")
    print("\nhigh-high -> low input for the mean-coupling weight:")
    for M in args.M:
        full, k1 = high_high_to_low(M)
        print(f"  M={M:<4} |h| weight {full:.4f} (sqrt(1+M^2) = {math.sqrt(1 + M * M):.4f}), |h1| weight {k1:.4f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(table, fh, indent=2)


if __name__ == "__main__":
    main()
