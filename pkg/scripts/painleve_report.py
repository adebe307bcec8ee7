#!/usr/bin/env python3
"""Painleve-I eigenvalue sequence, growth constant and oscillation law.

Usage: python scripts/painleve_report.py [count]
"""

import math
import sys

sys.path.insert(0, "src")

from nel.painleve import (PainleveConfig, estimate_C, fit_oscillation_envelope,
                          integrate_with_poles, painleve_eigenvalues)


def main() -> None:
    count = int(sys.argv[1]) if len(sys.argv) > 1 else 12
    cfg = PainleveConfig()
    eigs = painleve_eigenvalues(count, cfg)
    print(f"{'n':>3} {'a_n':>14} {'a_n / n^0.6':>13}")
    for n, a in enumerate(eigs, start=1):
        print(f"{n:>3} {a:>14.7f} {a / n ** 0.6:>13.7f}")
    if len(eigs) >= 8:
        c = estimate_C(eigs)
        print(f"\nextrapolated growth constant : {c:.6f}")
        print(f"reported value               : 4.28373")
        print(f"(17/5) 2^(1/3)               : {3.4 * 2 ** (1 / 3):.6f}")

    segs, _ = integrate_with_poles(1.0, -80.0, cfg, dense=True)
    fit = fit_oscillation_envelope(segs[-1], fit_window=(-80.0, -25.0))
    print(f"\noscillation about -sqrt(-x) (a = 1.0, {fit.n_extrema} extrema):")
    print(f"  amplitude exponent : {fit.amplitude_exponent:+.5f}   (-1/8 = -0.125)")
    print(f"  phase coefficient  : {fit.phase_coefficient:.6f}   "
          f"((4/5) sqrt(2) = {0.8 * math.sqrt(2):.6f})")


if __name__ == "__main__":
    main()
