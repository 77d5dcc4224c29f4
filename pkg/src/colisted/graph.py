"""The co-listed graph: projection of list memberships onto movie pairs.

Edges are keyed by canonical pairs ``(a, b)`` with ``a < b``, so symmetry
holds by construction and self-loops cannot be stored.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping

import networkx as nx

from .errors import ContractError, ParseError
from .ingest import ATTRIBUTES, ListMembershipTable, MovieMetadata

RAW = "raw_count"
NORMALIZED = "normalized"


def pair(a, b):
    """Canonical unordered pair key."""
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True, eq=False)
class CoListGraph:
    nodes: frozenset
    edges: Mapping[tuple, float] = field(default_factory=dict)
    weight_kind: str = NORMALIZED

    def __post_init__(self):
        if self.weight_kind not in (RAW, NORMALIZED):
            raise ContractError(f"unknown weight kind {self.weight_kind!r}")

    def __eq__(self, other):
        if not isinstance(other, CoListGraph):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and dict(self.edges) == dict(other.edges)
            and self.weight_kind == other.weight_kind
        )

    def __len__(self):
        return len(self.nodes)

    @property
    def n_edges(self):
        return len(self.edges)

    @cached_property
    def adjacency(self) -> dict[str, dict[str, float]]:
        adj = {n: {} for n in sorted(self.nodes)}
        for (a, b), w in sorted(self.edges.items()):
            adj[a][b] = w
            adj[b][a] = w
        return adj

    def neighbors(self, node):
        return self.adjacency[node]

    def weight(self, a, b, default=0.0):
        return self.edges.get(pair(a, b), default)

    def strength(self, node):
        return sum(self.adjacency[node].values())

    def subgraph(self, nodes: Iterable) -> "CoListGraph":
        """Subgraph induced by ``nodes`` (unknown ids are ignored)."""
        keep = frozenset(nodes) & self.nodes
        if len(keep) == len(self.nodes):
            return self
        adj = self.adjacency
        edges = {}
        for a in keep:
            for b, w in adj[a].items():
                if a < b and b in keep:
                    edges[(a, b)] = w
        return CoListGraph(keep, edges, self.weight_kind)

    def drop_isolated(self) -> "CoListGraph":
        touched = {n for e in self.edges for n in e}
        return CoListGraph(frozenset(touched), self.edges, self.weight_kind)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(sorted(self.nodes))
        g.add_weighted_edges_from((a, b, w) for (a, b), w in sorted(self.edges.items()))
        return g


def build_raw_graph(table: ListMembershipTable) -> CoListGraph:
    """Project memberships onto movies; edge weight = number of shared lists."""
    counts = Counter()
    for movies in table.lists.values():
        for a, b in combinations(sorted(movies), 2):
            counts[(a, b)] += 1
    return CoListGraph(table.movies, dict(counts), RAW)


def cocit_weight(size_a: int, size_b: int, shared: int) -> float:
    """Normalised co-listing affinity of two movies.

    ``shared**2 / (min(size_a, size_b) * mean(size_a, size_b))``, where the
    sizes are the numbers of lists each movie belongs to. The result lies in
    [0, 1] and equals 1 only when both movies sit on exactly the same lists.
    """
    if size_a < 1 or size_b < 1 or shared < 0 or shared > min(size_a, size_b):
        raise ContractError(
            f"invalid list-set sizes: size_a={size_a}, size_b={size_b}, shared={shared}"
        )
    # min * mean == min * (a + b) / 2; one division keeps the result correctly rounded
    return (2 * shared * shared) / (min(size_a, size_b) * (size_a + size_b))


def normalize_graph(raw: CoListGraph, table: ListMembershipTable) -> CoListGraph:
    if raw.weight_kind != RAW:
        raise ContractError("normalize_graph expects a raw-count graph")
    sizes = table.movie_lists
    edges = {}
    for (a, b), shared in raw.edges.items():
        if a not in sizes or b not in sizes:
            missing = a if a not in sizes else b
            raise ContractError(f"edge endpoint {missing!r} not in membership table")
        edges[(a, b)] = cocit_weight(len(sizes[a]), len(sizes[b]), int(shared))
    return CoListGraph(raw.nodes, edges, NORMALIZED)


def threshold_graph(g: CoListGraph, tau=0.1, drop_isolated=False) -> CoListGraph:
    """Keep edges with weight >= tau; isolated nodes are kept unless asked."""
    if g.weight_kind != NORMALIZED:
        raise ContractError("threshold_graph expects a normalized graph")
    if not 0.0 <= tau <= 1.0:
        raise ContractError(f"tau must lie in [0, 1], got {tau}")
    out = CoListGraph(g.nodes, {e: w for e, w in g.edges.items() if w >= tau}, NORMALIZED)
    return out.drop_isolated() if drop_isolated else out


def connected_components(g: CoListGraph) -> list[frozenset]:
    """Components sorted by size descending, ties by smallest member id."""
    comps = [frozenset(c) for c in nx.connected_components(g.to_networkx())]
    comps.sort(key=lambda c: (-len(c), min(c)))
    return comps


def ego_network(g: CoListGraph, center) -> CoListGraph:
    if center not in g.nodes:
        raise KeyError(f"unknown node {center!r}")
    return g.subgraph({center, *g.neighbors(center)})


# -- edge-list / GraphML I/O -------------------------------------------------


def write_edgelist(g: CoListGraph, path):
    with open(path, "w", encoding="utf-8") as fh:
        for (a, b), w in sorted(g.edges.items()):
            fh.write(f"{a}\t{b}\t{w:.6f}\n")


def read_edgelist(path, weight_kind=NORMALIZED, nodes: Iterable | None = None) -> CoListGraph:
    """Read ``a <TAB> b <TAB> weight`` lines; extra ``nodes`` are added isolated."""
    edges = {}
    seen = set(nodes or ())
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            cols = line.rstrip("\n").split("\t")
            if len(cols) != 3:
                raise ParseError(f"expected 3 columns, got {len(cols)}", path, lineno)
            a, b = cols[0].strip(), cols[1].strip()
            if not a or not b or a == b:
                raise ParseError("empty id or self-loop", path, lineno)
            try:
                w = float(cols[2])
            except ValueError:
                raise ParseError(f"bad weight {cols[2]!r}", path, lineno) from None
            if weight_kind == RAW and w == int(w):
                w = int(w)
            edges[pair(a, b)] = w
            seen.update((a, b))
    return CoListGraph(frozenset(seen), edges, weight_kind)


def _graphml_value(v):
    if isinstance(v, (frozenset, set, list, tuple)):
        return "|".join(sorted(map(str, v)))
    return v


def write_graphml(
    g: CoListGraph,
    path,
    metadata: Mapping[str, MovieMetadata] | None = None,
    node_attrs: Mapping[str, Mapping[str, object]] | None = None,
):
    """GraphML export with a ``weight`` edge attribute.

    ``metadata`` adds the categorical attributes (pipe joined) and rating to
    each node; ``node_attrs`` adds arbitrary per-node values.
    """
    nxg = g.to_networkx()
    for node in nxg.nodes:
        attrs = nxg.nodes[node]
        if metadata and node in metadata:
            m = metadata[node]
            for a in ATTRIBUTES:
                attrs[a] = _graphml_value(m.values(a))
            if m.rating is not None:
                attrs["rating"] = float(m.rating)
            if m.title:
                attrs["title"] = m.title
        if node_attrs and node in node_attrs:
            for k, v in node_attrs[node].items():
                attrs[k] = _graphml_value(v)
    nx.write_graphml(nxg, path)

