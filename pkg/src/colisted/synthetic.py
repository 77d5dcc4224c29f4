"""Synthetic inputs with known structure.

``planted_graph`` builds a normalized graph of dense overlapping blocks for
recovery tests. ``make_fixture`` builds a small membership + metadata data
set whose lists are drawn from latent movie groups, for exercising the full
pipeline.
"""

from __future__ import annotations

from importlib import resources
from itertools import combinations
from pathlib import Path

import numpy as np

from .graph import NORMALIZED, CoListGraph, pair
from .ingest import ListMembershipTable, MovieMetadata, write_memberships, write_metadata


def planted_graph(
    k=5,
    size=20,
    overlap=0.1,
    p_in=1.0,
    p_out=0.05,
    w_in=(0.8, 1.0),
    w_out=(0.01, 0.1),
    seed=0,
) -> tuple[CoListGraph, list[frozenset]]:
    """Graph with ``k`` planted communities of ``size`` nodes each.

    A fraction ``overlap`` of the distinct nodes belongs to two communities;
    shared node ``j`` joins communities ``j % k`` and ``(j + 1) % k``.
    Returns the graph and the planted communities.
    """
    rng = np.random.default_rng(seed)
    n_shared = round(overlap * k * size / (1.0 + overlap)) if k > 1 else 0
    comms: list[set] = [set() for _ in range(k)]
    width = len(str(k * size))
    counter = 0

    def new_node():
        nonlocal counter
        counter += 1
        return f"n{counter:0{width}d}"

    for j in range(n_shared):
        v = new_node()
        a, b = j % k, (j + 1) % k
        if len(comms[a]) < size and len(comms[b]) < size:
            comms[a].add(v)
            comms[b].add(v)
    for c in comms:
        while len(c) < size:
            c.add(new_node())

    nodes = sorted(set().union(*comms))
    labels = {v: {i for i, c in enumerate(comms) if v in c} for v in nodes}
    edges = {}
    for a, b in combinations(nodes, 2):
        if labels[a] & labels[b]:
            if rng.random() < p_in:
                edges[pair(a, b)] = float(rng.uniform(*w_in))
        elif rng.random() < p_out:
            edges[pair(a, b)] = float(rng.uniform(*w_out))
    return CoListGraph(frozenset(nodes), edges, NORMALIZED), [frozenset(c) for c in comms]


def best_match_f1(planted, found) -> list[float]:
    """For each planted community, F1 of its best-matching found cluster."""
    scores = []
    for p in planted:
        best = 0.0
        for f in found:
            tp = len(p & f)
            if tp:
                best = max(best, 2 * tp / (len(p) + len(f)))
        scores.append(best)
    return scores


_GENRES = [
    "Action", "Adventure", "Animation", "Comedy", "Crime", "Documentary",
    "Drama", "Family", "Fantasy", "Film-Noir", "Horror", "Musical",
    "Mystery", "Romance", "Sci-Fi", "Thriller", "War", "Western",
]
_PLACES = [
    ("USA", "English"), ("UK", "English"), ("Japan", "Japanese"),
    ("Italy", "Italian"), ("France", "French"), ("India", "Hindi"),
    ("Germany", "German"), ("Spain", "Spanish"), ("South Korea", "Korean"),
]
_DECADES = [f"{y}s" for y in range(1930, 2020, 10)]
_TYPES = ["feature film", "feature film", "feature film", "TV series", "documentary", "short film"]


def make_fixture(
    n_groups=8,
    group_size=25,
    n_lists=400,
    list_size=(5, 30),
    noise=0.15,
    n_unclustered=40,
    bridge=2,
    seed=7,
) -> tuple[ListMembershipTable, dict[str, MovieMetadata], list[frozenset]]:
    """Memberships and metadata generated from latent movie groups.

    Each list picks one group and draws most of its movies from it, with a
    ``noise`` share drawn from anywhere. Every group has a dominant genre,
    decade, country/language, type and director, carried by most of its
    movies. Consecutive groups share ``bridge`` movies. Some lists fall
    outside the 5..100 size window so the filters have something to remove.
    Returns (table, metadata, latent groups).
    """
    rng = np.random.default_rng(seed)
    total = n_groups * group_size + n_unclustered
    movies = [f"tt{i:07d}" for i in range(1, total + 1)]
    cores = [movies[g * group_size:(g + 1) * group_size] for g in range(n_groups)]
    group_of = {m: g for g, ms in enumerate(cores) for m in ms}
    # the first ``bridge`` movies of each group also belong to the previous group
    groups = [
        frozenset(cores[g]) | frozenset(cores[(g + 1) % n_groups][:bridge]) for g in range(n_groups)
    ]

    profiles = []
    for g in range(n_groups):
        country, language = _PLACES[g % len(_PLACES)]
        profiles.append(
            {
                "genre": _GENRES[(3 * g) % len(_GENRES)],
                "decade": _DECADES[(2 * g + 1) % len(_DECADES)],
                "country": country,
                "language": language,
                "type": _TYPES[g % len(_TYPES)],
                "director": f"Director {g}",
                "actors": [f"Actor {g}-{a}" for a in range(3)],
            }
        )

    def pick(p_keep, own, pool):
        return own if rng.random() < p_keep else pool[int(rng.integers(len(pool)))]

    meta = {}
    for i, m in enumerate(movies):
        g = group_of.get(m)
        if g is None:
            prof = profiles[int(rng.integers(n_groups))]
            keep = 0.2
        else:
            prof = profiles[g]
            keep = 0.9
        country, language = _PLACES[int(rng.integers(len(_PLACES)))]
        genres = {pick(keep, prof["genre"], _GENRES)}
        if rng.random() < 0.5:
            genres.add(_GENRES[int(rng.integers(len(_GENRES)))])
        actors = {a for a in prof["actors"] if rng.random() < keep * 0.6}
        actors.add(f"Actor x{int(rng.integers(500))}")
        rating = None if rng.random() < 0.05 else round(float(rng.uniform(3.0, 9.5)), 1)
        meta[m] = MovieMetadata(
            movie_id=m,
            type=pick(keep, prof["type"], _TYPES),
            decade=pick(keep, prof["decade"], _DECADES),
            genres=frozenset(genres),
            countries=frozenset({prof["country"] if rng.random() < keep else country}),
            languages=frozenset({prof["language"] if rng.random() < keep else language}),
            directors=frozenset({pick(keep * 0.8, prof["director"], [f"Director x{j}" for j in range(200)])}),
            actors=frozenset(actors),
            rating=rating,
            title=f"Movie {i + 1}",
        )

    rows = []
    owners = {}
    lo, hi = list_size
    n_users = max(1, n_lists // 3)
    for li in range(n_lists):
        list_id = f"ls{li:06d}"
        owners[list_id] = f"ur{int(rng.integers(n_users)):05d}"
        if li % 50 == 0:
            # an over-long catch-all list; removed by the size filter
            chosen = rng.choice(total, size=min(total, 120), replace=False)
            rows.extend((list_id, movies[j]) for j in chosen)
            continue
        if li % 50 == 1:
            size = 3
        else:
            size = int(rng.integers(lo, hi + 1))
        g = int(rng.integers(n_groups))
        own = sorted(groups[g])
        n_noise = int(rng.binomial(size, noise))
        n_own = min(len(own), size - n_noise)
        picked = set(rng.choice(len(own), size=n_own, replace=False).tolist())
        chosen = {own[j] for j in picked}
        while len(chosen) < size:
            chosen.add(movies[int(rng.integers(total))])
        rows.extend((list_id, m) for m in sorted(chosen))
    return ListMembershipTable.from_rows(rows, owners), meta, groups


def write_fixture(out_dir, format="tsv", **kwargs):
    """Write fixture files; returns (memberships_path, metadata_path)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table, meta, _ = make_fixture(**kwargs)
    ext = "tsv" if format == "tsv" else "jsonl"
    mp, dp = out / f"memberships.{ext}", out / f"metadata.{ext}"
    write_memberships(table, mp, format)
    write_metadata(meta, dp, format)
    return mp, dp


def bundled_fixture() -> tuple[Path, Path]:
    """Paths of the fixture files shipped with the package (tsv, default seed)."""
    base = resources.files("colisted") / "data"
    return Path(str(base / "memberships.tsv")), Path(str(base / "metadata.tsv"))
