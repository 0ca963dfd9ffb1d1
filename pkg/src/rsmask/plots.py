"""Figure rendering for campaign artifacts (PNG next to each CSV)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .leakage import T_THRESHOLD


def sei_curve_png(path, curve):
    """Correct-key vs max-wrong-key SEI over corpus size."""
    n = [r[0] for r in curve]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(n, [r[1] for r in curve], marker="o", label="correct key")
    ax.plot(n, [r[2] for r in curve], marker="s", label="max wrong key")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("ineffective ciphertexts")
    ax.set_ylabel("SEI")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def histogram_png(path, hists: dict):
    """256-bin value distributions, one panel per named histogram."""
    fig, axes = plt.subplots(len(hists), 1, figsize=(7, 2.6 * len(hists)), squeeze=False)
    for ax, (name, counts) in zip(axes[:, 0], hists.items()):
        counts = np.asarray(counts, dtype=float)
        ax.bar(np.arange(256), counts, width=1.0)
        if counts.sum() > 0:
            ax.axhline(counts.sum() / 256.0, color="k", ls="--", lw=0.8)
        ax.set_xlim(0, 255)
        ax.set_ylabel("count")
        ax.set_title(name, fontsize=9)
    axes[-1, 0].set_xlabel("byte value")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def ttest_png(path, t_values):
    fig, ax = plt.subplots(figsize=(7, 3.2))
    ax.plot(np.asarray(t_values), lw=0.9)
    ax.axhline(T_THRESHOLD, color="r", ls="--", lw=0.8)
    ax.axhline(-T_THRESHOLD, color="r", ls="--", lw=0.8)
    ax.set_xlabel("sample (pipeline stage per round)")
    ax.set_ylabel("t")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
