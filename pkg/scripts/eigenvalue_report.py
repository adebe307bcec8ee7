#!/usr/bin/env python3
"""Print the separatrix intercept table and the extrapolated growth constant.

Usage: python scripts/eigenvalue_report.py [n_max]
"""

import math
import sys

sys.path.insert(0, "src")

from nel.extrapolate import fit_correction_exponent, richardson
from nel.limitcurve import GROWTH_CONSTANT
from nel.separatrix import eigenvalue_table, trace_separatrix_backward


def main() -> None:
    n_max = int(sys.argv[1]) if len(sys.argv) > 1 else 6
    print(f"{'n':>4} {'a_n (backward)':>18} {'tail m':>7} {'cross-method':>13}")
    for rec in eigenvalue_table(-3, n_max):
        res = f"{rec.residual:.1e}" if rec.residual is not None else "-"
        print(f"{rec.n:>4} {rec.a_n:>18.10f} {rec.tail_m:>7} {res:>13}")

    idx = [125, 250, 500, 1000, 2000]
    seq = []
    for n in idx:
        rec, _ = trace_separatrix_backward(n, dense=False)
        seq.append(math.sqrt(2.0) * rec.a_n / math.sqrt(2 * n - 0.5))
    result = richardson(seq, idx, stages=4)
    print(f"\nscaled intercepts sqrt(2) a_n / sqrt(2n-1/2) at n = {idx}:")
    for n, v in zip(idx, seq):
        print(f"  n={n:<5} {v:.12f}")
    print(f"extrapolated limit : {result.limit:.12f}")
    print(f"2^(5/6)            : {GROWTH_CONSTANT:.12f}")
    print(f"difference         : {result.limit - GROWTH_CONSTANT:+.2e}")
    print(f"fitted correction exponent: "
          f"{fit_correction_exponent(seq, idx, GROWTH_CONSTANT):.3f}")


if __name__ == "__main__":
    main()
