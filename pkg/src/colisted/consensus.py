"""Ensemble consensus over subsampled base clusterings.

Each run clusters the subgraph induced by a random node sample. For every
pair of nodes that share at least one cluster in that run, the Jaccard
similarity of their label sets is added to a sparse symmetric matrix. After
``r`` runs the sums are divided by ``r`` and the matrix, read as a weighted
graph, is clustered once more to give the consensus clusters.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .base_cluster import ClusterSolution, Clusterer, cluster as default_cluster
from .errors import ContractError
from .graph import NORMALIZED, CoListGraph, pair


@dataclass
class ConsensusMatrix:
    """Sparse symmetric co-assignment matrix; absent entries are 0.

    While runs are being accumulated ``entries`` holds raw sums; after
    :func:`normalize` it holds values in [0, 1].
    """

    nodes: tuple = ()
    entries: dict = field(default_factory=dict)
    runs: int = 0
    normalized: bool = False
    samples: list = field(default_factory=list)

    def __getitem__(self, key):
        a, b = key
        if a == b:
            raise KeyError("diagonal entries are not stored")
        return self.entries.get(pair(a, b), 0.0)

    def to_graph(self) -> CoListGraph:
        """Every non-zero entry becomes an edge; no threshold is applied."""
        if not self.normalized:
            raise ContractError("normalize the matrix before building its graph")
        edges = {e: v for e, v in self.entries.items() if v > 0.0}
        return CoListGraph(frozenset(self.nodes), edges, NORMALIZED)


def run_seed(master_seed: int, run_index: int) -> int:
    """Stable per-run seed derived from the master seed and run index."""
    return int(np.random.SeedSequence([int(master_seed), int(run_index)]).generate_state(1)[0])


def sample_nodes(g: CoListGraph, fraction=0.8, seed=0) -> frozenset:
    """Uniform sample without replacement of round(fraction * n) nodes."""
    if not 0.0 < fraction <= 1.0:
        raise ContractError(f"fraction must lie in (0, 1], got {fraction}")
    nodes = sorted(g.nodes)
    if not nodes:
        return frozenset()
    # round half up; at least one node
    k = max(1, min(len(nodes), math.floor(fraction * len(nodes) + 0.5)))
    if k == len(nodes):
        return frozenset(nodes)
    idx = np.random.default_rng(seed).choice(len(nodes), size=k, replace=False)
    return frozenset(nodes[i] for i in idx)


def jaccard_labels(labels_a, labels_b) -> float:
    a, b = set(labels_a), set(labels_b)
    union = len(a | b)
    if union == 0:
        return 0.0
    return len(a & b) / union


def accumulate_run(m: ConsensusMatrix, solution: ClusterSolution, sampled) -> ConsensusMatrix:
    """Add one run's pairwise label Jaccard scores to ``m`` (in place)."""
    if m.normalized:
        raise ContractError("cannot accumulate into a normalized matrix")
    sampled = frozenset(sampled)
    outside = solution.members - sampled
    if outside:
        raise ContractError(f"cluster members outside the sample: {sorted(outside)[:5]}")
    labels = solution.node_labels
    seen = set()
    entries = m.entries
    for members in solution.clusters:
        for a, b in combinations(sorted(members), 2):
            if (a, b) in seen:
                continue
            seen.add((a, b))
            entries[(a, b)] = entries.get((a, b), 0.0) + jaccard_labels(labels[a], labels[b])
    m.runs += 1
    m.samples.append(sampled)
    return m


def normalize(m: ConsensusMatrix, by="runs") -> ConsensusMatrix:
    """Divide sums by the number of runs.

    ``by="cosampled"`` divides each entry by the number of runs in which both
    endpoints were sampled instead.
    """
    if m.runs < 1:
        raise ContractError("no runs accumulated")
    if by == "runs":
        entries = {e: v / m.runs for e, v in m.entries.items()}
    elif by == "cosampled":
        entries = {}
        for (a, b), v in m.entries.items():
            n = sum(1 for s in m.samples if a in s and b in s)
            entries[(a, b)] = v / n
    else:
        raise ContractError(f"unknown normalization {by!r}")
    return ConsensusMatrix(m.nodes, entries, m.runs, True, list(m.samples))


def _one_run(args):
    g, fraction, base, master_seed, i = args
    seed = run_seed(master_seed, i)
    sampled = sample_nodes(g, fraction, seed)
    try:
        sol = base(g.subgraph(sampled), seed)
    except Exception as exc:
        raise RuntimeError(f"base clustering failed in run {i}: {exc}") from exc
    return sampled, sol


def run_ensemble(
    g: CoListGraph,
    r=100,
    fraction=0.8,
    base: Clusterer = default_cluster,
    master_seed=0,
    workers=1,
) -> list[tuple[frozenset, ClusterSolution]]:
    """Run ``r`` base clusterings; returns (sample, solution) per run, in run order."""
    if r < 1:
        raise ContractError(f"r must be >= 1, got {r}")
    if workers is None:
        workers = os.cpu_count() or 1
    jobs = [(g, fraction, base, master_seed, i) for i in range(r)]
    if workers <= 1 or r == 1:
        return [_one_run(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_one_run, jobs, chunksize=max(1, r // (4 * workers))))


def build_consensus(
    g: CoListGraph,
    r=100,
    fraction=0.8,
    base: Clusterer = default_cluster,
    master_seed=0,
    workers=1,
    normalization="runs",
    runs=None,
) -> ConsensusMatrix:
    """Accumulate the consensus matrix over an ensemble of ``r`` runs.

    Runs may execute in parallel, but accumulation always happens in run
    order, so the result does not depend on ``workers``. Pass ``runs`` (the
    output of :func:`run_ensemble`) to reuse existing base clusterings.
    """
    if runs is None:
        runs = run_ensemble(g, r, fraction, base, master_seed, workers)
    m = ConsensusMatrix(tuple(sorted(g.nodes)))
    for sampled, sol in runs:
        accumulate_run(m, sol, sampled)
    return normalize(m, normalization)


def final_clusters(
    m: ConsensusMatrix, base: Clusterer = default_cluster, seed=0, min_size=3
) -> ClusterSolution:
    """Cluster the consensus graph once and drop clusters below ``min_size``."""
    if min_size < 1:
        raise ContractError(f"min_size must be >= 1, got {min_size}")
    cg = m.to_graph().drop_isolated()
    if not cg.edges:
        return ClusterSolution()
    return ClusterSolution.from_sets(base(cg, seed).filter_size(min_size).clusters)


def write_matrix(m: ConsensusMatrix, path):
    with open(path, "w", encoding="utf-8") as fh:
        for (a, b), v in sorted(m.entries.items()):
            fh.write(f"{a}\t{b}\t{v:.6f}\n")


def overlap_report(sol: ClusterSolution) -> dict:
    sizes = sol.sizes()
    covered = len(sol.members)
    multi = len(sol.overlapping_nodes())
    return {
        "n_clusters": len(sol),
        "sizes": sizes,
        "min_size": min(sizes) if sizes else 0,
        "max_size": max(sizes) if sizes else 0,
        "covered_nodes": covered,
        "multi_assigned_nodes": multi,
        "multi_assigned_fraction": multi / covered if covered else 0.0,
    }
