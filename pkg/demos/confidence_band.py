"""Simultaneous confidence band for an unknown trade-off curve.

Draws one large sample from a Laplace pair, builds the half-line band,
verifies that the analytic curve sits inside it, and writes the band to
CSV alongside an SVG plot.
"""
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from tradeoff_audit import HalfLines, LaplaceShiftPair, compute_band, sample_pair
from tradeoff_audit.bands import write_band_csv

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")


def main():
    n = 10_000
    spec = LaplaceShiftPair(1.0)
    data = sample_pair(spec, n, seed=4)
    band = compute_band(data, HalfLines(), delta=0.05)

    truth = spec.truth_curve().evaluate(band.alphas)
    inside = np.all(band.lower_gcm <= truth + 1e-9) and np.all(
        truth <= band.upper + 1e-9
    )
    width = float(np.median(band.upper - band.lower_gcm))
    print(f"n={n}, grid points={band.alphas.size}")
    print(f"true curve inside band: {inside}")
    print(f"median band width:      {width:.4f}")

    os.makedirs(OUT_DIR, exist_ok=True)
    csv_path = os.path.join(OUT_DIR, "band.csv")
    write_band_csv(band, csv_path)

    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.fill_between(band.alphas, band.lower_gcm, band.upper, alpha=0.3, label="band")
    ax.plot(band.alphas, truth, "k--", lw=1, label=spec.truth_curve().label())
    ax.set_xlabel("type I error")
    ax.set_ylabel("type II error")
    ax.legend()
    fig.tight_layout()
    svg_path = os.path.join(OUT_DIR, "band.svg")
    fig.savefig(svg_path)
    print(f"wrote {csv_path} and {svg_path}")


if __name__ == "__main__":
    main()
