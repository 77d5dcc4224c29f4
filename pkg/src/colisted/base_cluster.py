"""Overlapping community detection on a weighted co-listed graph.

The default clusterer is a greedy seed-and-expand local fitness optimiser in
the style of LFM. Any callable ``(graph, seed) -> ClusterSolution`` can stand
in for it, and clusterings produced by an external tool can be loaded from
the usual one-community-per-line text format.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable

import numpy as np

from .errors import ContractError, ValidationError
from .graph import NORMALIZED, CoListGraph

log = logging.getLogger(__name__)

# gains closer than this are treated as ties
_EPS = 1e-12


@dataclass(frozen=True)
class ClusterSolution:
    """Possibly-overlapping clusters; a cluster's id is its position."""

    clusters: tuple = ()

    def __post_init__(self):
        clusters = tuple(frozenset(c) for c in self.clusters)
        if any(not c for c in clusters):
            raise ValidationError("empty cluster")
        if len(set(clusters)) != len(clusters):
            raise ValidationError("duplicate clusters")
        object.__setattr__(self, "clusters", clusters)

    @classmethod
    def from_sets(cls, sets: Iterable[Iterable], dedupe=True) -> "ClusterSolution":
        """Build a solution in canonical order (size desc, then members)."""
        uniq = {frozenset(s) for s in sets if s} if dedupe else [frozenset(s) for s in sets]
        return cls(tuple(sorted(uniq, key=lambda c: (-len(c), sorted(c)))))

    def __len__(self):
        return len(self.clusters)

    def __iter__(self):
        return iter(self.clusters)

    @cached_property
    def node_labels(self) -> dict[str, frozenset]:
        labels = defaultdict(set)
        for cid, members in enumerate(self.clusters):
            for m in members:
                labels[m].add(cid)
        return {m: frozenset(ls) for m, ls in labels.items()}

    @property
    def members(self) -> frozenset:
        return frozenset(self.node_labels)

    def overlapping_nodes(self) -> frozenset:
        return frozenset(m for m, ls in self.node_labels.items() if len(ls) > 1)

    def sizes(self) -> list[int]:
        return [len(c) for c in self.clusters]

    def filter_size(self, min_size) -> "ClusterSolution":
        return ClusterSolution(tuple(c for c in self.clusters if len(c) >= min_size))

    def validate(self, g: CoListGraph):
        unknown = self.members - g.nodes
        if unknown:
            raise ValidationError(f"cluster members not in graph: {sorted(unknown)[:5]}")


Clusterer = Callable[[CoListGraph, int], ClusterSolution]


def _fitness(k_in, k_out, alpha):
    total = k_in + k_out
    if total <= 0.0:
        return 0.0
    return k_in / total**alpha


def _grow(adj, strength, rank, seed_node, alpha):
    members = {seed_node}
    k_in, k_out = 0.0, strength[seed_node]
    # weight from each frontier node into the community
    w_to = dict(adj[seed_node])
    fit = _fitness(k_in, k_out, alpha)
    while w_to:
        best, best_gain, best_state = None, 0.0, None
        for v, wv in w_to.items():
            nk_in = k_in + 2.0 * wv
            nk_out = k_out - wv + (strength[v] - wv)
            gain = _fitness(nk_in, nk_out, alpha) - fit
            if gain <= _EPS:
                continue
            if best is None or gain > best_gain + _EPS or (
                abs(gain - best_gain) <= _EPS and rank[v] < rank[best]
            ):
                best, best_gain, best_state = v, gain, (nk_in, nk_out)
        if best is None:
            break
        members.add(best)
        k_in, k_out = best_state
        fit = _fitness(k_in, k_out, alpha)
        del w_to[best]
        for u, w in adj[best].items():
            if u not in members:
                w_to[u] = w_to.get(u, 0.0) + w
    return frozenset(members)


def _jaccard(a, b):
    return len(a & b) / len(a | b)


def _merge_similar(comms, threshold):
    comms = list(comms)
    merged = True
    while merged:
        merged = False
        for i in range(len(comms)):
            for j in range(i + 1, len(comms)):
                if _jaccard(comms[i], comms[j]) >= threshold:
                    comms[i] = comms[i] | comms[j]
                    del comms[j]
                    merged = True
                    break
            if merged:
                break
    return comms


def lfm_cluster(g: CoListGraph, seed: int = 0, alpha: float = 1.0, merge_jaccard: float = 0.8) -> ClusterSolution:
    """Greedy local-fitness expansion with overlap.

    Seeds are taken in order of decreasing weighted degree among nodes not
    yet covered by any community. Each community grows by the neighbour with
    the largest positive gain in ``k_in / (k_in + k_out) ** alpha`` and stops
    when no neighbour improves it; nodes already in other communities remain
    eligible, which is where overlap comes from. Communities whose Jaccard
    similarity reaches ``merge_jaccard`` are merged afterwards.

    All ties (seed order among equal strengths, equal gains) are broken by a
    random permutation of the nodes drawn from ``seed``; nothing else is
    random. Isolated nodes end up unassigned.
    """
    if g.weight_kind != NORMALIZED:
        raise ContractError("clustering expects a normalized graph")
    if not g.nodes:
        raise ContractError("cannot cluster an empty graph")
    adj = g.adjacency
    nodes = sorted(g.nodes)
    perm = np.random.default_rng(seed).permutation(len(nodes))
    rank = {nodes[i]: r for r, i in enumerate(perm)}
    strength = {n: sum(adj[n].values()) for n in nodes}

    covered = set()
    comms = []
    for s in sorted(nodes, key=lambda n: (-strength[n], rank[n])):
        if s in covered or not adj[s]:
            continue
        comm = _grow(adj, strength, rank, s, alpha)
        if len(comm) < 2:
            continue
        comms.append(comm)
        covered |= comm
    return ClusterSolution.from_sets(_merge_similar(comms, merge_jaccard))


def cluster(g: CoListGraph, seed: int = 0) -> ClusterSolution:
    """Default base clusterer."""
    return lfm_cluster(g, seed)


def load_external_clustering(path, graph: CoListGraph | None = None) -> ClusterSolution:
    """Parse a one-cluster-per-line file of whitespace separated node ids.

    Repeated ids on a line collapse; duplicate clusters are dropped with a
    warning. Lines starting with ``#`` are comments (OSLOM writes them).
    """
    sets = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.lstrip().startswith("#"):
                continue
            members = frozenset(line.split())
            if not members:
                continue
            if members in seen:
                log.warning("%s:%d: duplicate cluster collapsed", path, lineno)
                continue
            seen.add(members)
            sets.append(members)
    sol = ClusterSolution(tuple(sets))
    if graph is not None:
        sol.validate(graph)
    return sol


def write_clustering(sol: ClusterSolution, path):
    with open(path, "w", encoding="utf-8") as fh:
        for members in sol.clusters:
            fh.write(" ".join(sorted(members)) + "\n")

