"""Figures written next to the CSV reports.

Rendering uses the non-interactive Agg backend and strips the PNG software
tag so reruns produce byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_RC = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 100,
    "savefig.dpi": 120,
}

_PNG_META = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="png", metadata=_PNG_META)
    plt.close(fig)
    return path


def plot_counts_vs_rating(counts, meta, path):
    """Scatter of list assignments against rating, one point per rated movie."""
    pts = [(n, meta[m].rating) for m, n in sorted(counts.items()) if m in meta and meta[m].rating is not None]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        if pts:
            ax.scatter([p[0] for p in pts], [p[1] for p in pts], s=6, alpha=0.5, lw=0)
            ax.set_xscale("log")
        ax.set_xlabel("Number of lists")
        ax.set_ylabel("Rating")
        return _save(fig, path)


def plot_genre_means(aggs, path):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for genre, (ml, mr) in aggs.items():
            if mr is None:
                continue
            ax.scatter(ml, mr, s=12, color="C0")
            ax.annotate(genre, (ml, mr), fontsize=6, xytext=(2, 2), textcoords="offset points")
        ax.set_xlabel("Mean number of lists")
        ax.set_ylabel("Mean rating")
        return _save(fig, path)


def plot_coverage_curves(curves, path):
    """``curves`` maps attribute -> [(threshold, percent), ...]."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for attribute, curve in curves.items():
            ax.plot([c[0] for c in curve], [c[1] for c in curve], marker="o", ms=3, label=attribute)
        ax.set_xlabel("Max corrected enrichment")
        ax.set_ylabel("% of clusters")
        ax.set_ylim(0, 101)
        ax.legend(frameon=False, ncol=2)
        return _save(fig, path)


def plot_multi_attribute_curves(curves, path):
    """``curves`` maps threshold -> [(X, percent), ...]."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for t, curve in curves.items():
            ax.plot([c[0] for c in curve], [c[1] for c in curve], marker="o", ms=3, label=f">= {t:.1f}")
        ax.set_xlabel("Number of enriched attributes")
        ax.set_ylabel("% of clusters")
        ax.set_ylim(0, 101)
        ax.legend(frameon=False, ncol=2)
        return _save(fig, path)
