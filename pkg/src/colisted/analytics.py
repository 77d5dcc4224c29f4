"""Descriptive statistics of list usage and cluster subgraph extraction."""

from __future__ import annotations

import csv
import math
from collections import defaultdict

import numpy as np

from .base_cluster import ClusterSolution
from .errors import ContractError
from .graph import CoListGraph
from .ingest import ListMembershipTable


def list_counts(table: ListMembershipTable) -> dict[str, int]:
    """Number of distinct lists holding each movie."""
    return {m: len(ls) for m, ls in table.movie_lists.items()}


def top_listed(counts, meta, k=20) -> list[tuple]:
    """Rows of (movie_id, title, lists, rating), most-listed first, ties by id."""
    if k < 1:
        raise ContractError(f"k must be >= 1, got {k}")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
    rows = []
    for movie_id, n in ranked:
        m = meta.get(movie_id)
        rows.append((movie_id, m.title if m else None, n, m.rating if m else None))
    return rows


def genre_aggregates(counts, meta) -> dict[str, tuple[float, float | None]]:
    """genre -> (mean list count, mean rating); rating mean is None if no movie is rated."""
    n_lists = defaultdict(list)
    ratings = defaultdict(list)
    for movie_id, n in counts.items():
        m = meta.get(movie_id)
        if m is None:
            continue
        for genre in m.genres:
            n_lists[genre].append(n)
            if m.rating is not None:
                ratings[genre].append(m.rating)
    out = {}
    for genre in sorted(n_lists):
        r = ratings.get(genre)
        out[genre] = (
            math.fsum(n_lists[genre]) / len(n_lists[genre]),
            math.fsum(r) / len(r) if r else None,
        )
    return out


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ContractError("pearson needs two equal-length sequences of at least 2 values")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("correlation undefined for constant input")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def rating_correlation(counts, meta) -> float | None:
    """Pearson correlation of list count vs rating over rated movies."""
    pairs = [(n, meta[m].rating) for m, n in counts.items() if m in meta and meta[m].rating is not None]
    if len(pairs) < 2:
        return None
    try:
        return pearson([p[0] for p in pairs], [p[1] for p in pairs])
    except ValueError:
        return None


def cluster_subgraph(g: CoListGraph, clusters: ClusterSolution, selected) -> tuple[CoListGraph, dict]:
    """Subgraph induced by the selected clusters, plus per-node annotations.

    Annotations map node -> {"clusters": sorted ids within the selection,
    "multi": True when the node sits in more than one selected cluster}.
    """
    selected = sorted(set(selected))
    if not selected:
        raise ContractError("no clusters selected")
    for cid in selected:
        if not isinstance(cid, int) or not 0 <= cid < len(clusters):
            raise KeyError(f"unknown cluster id {cid!r}")
    labels = defaultdict(list)
    for cid in selected:
        for m in clusters.clusters[cid]:
            labels[m].append(cid)
    sub = g.subgraph(labels)
    annotations = {
        m: {"clusters": ls, "multi": len(ls) > 1} for m, ls in sorted(labels.items()) if m in sub.nodes
    }
    return sub, annotations


def write_movie_counts(counts, meta, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["movie_id", "lists", "rating"])
        for movie_id in sorted(counts):
            m = meta.get(movie_id)
            rating = "" if m is None or m.rating is None else m.rating
            w.writerow([movie_id, counts[movie_id], rating])


def write_genre_means(aggs, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["genre", "mean_lists", "mean_rating"])
        for genre, (ml, mr) in aggs.items():
            w.writerow([genre, f"{ml:.6f}", "" if mr is None else f"{mr:.6f}"])


def write_top_k(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "movie_id", "title", "lists", "rating"])
        for i, (movie_id, title, n, rating) in enumerate(rows, start=1):
            w.writerow([i, movie_id, title or "", n, "" if rating is None else rating])
