"""Tour of the built-in trade-off benchmarks.

Evaluates each analytic family on a grid, checks it against the exact
Neyman-Pearson oracle for a matching finite-support pair, and prints a
small comparison table.
"""
import numpy as np

from tradeoff_audit import (
    EpsDelta,
    GaussianShift,
    LaplaceShift,
    TvTolerant,
    np_curve_discrete,
    validate_curve,
)


def main():
    grid = np.linspace(0.0, 1.0, 6)
    families = [
        EpsDelta(np.log(2.0), 0.05),
        TvTolerant(0.1),
        GaussianShift(1.0),
        LaplaceShift(1.0),
    ]
    header = "alpha      " + "  ".join(f"{c.label():>16s}" for c in families)
    print(header)
    for a in grid:
        row = "  ".join(f"{c.evaluate(a):16.6f}" for c in families)
        print(f"{a:6.2f}   {row}")

    for curve in families:
        report = validate_curve(curve, 1001)
        status = "ok" if report.passed else f"violations: {report.violations}"
        print(f"validate {curve.label()}: {status}")

    # the discrete NP oracle recovers a two-point trade-off exactly
    curve = np_curve_discrete([0.5, 0.5], [0.9, 0.1])
    print("\nNP curve of p=(.5,.5) vs q=(.9,.1):")
    for a, b in zip(curve.alphas, curve.betas):
        print(f"  vertex ({a:.3f}, {b:.3f})")


if __name__ == "__main__":
    main()
