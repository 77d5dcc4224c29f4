"""Latent cluster mining from user-curated lists."""

from .base_cluster import ClusterSolution, cluster, lfm_cluster, load_external_clustering
from .consensus import ConsensusMatrix, build_consensus, final_clusters
from .graph import CoListGraph, build_raw_graph, cocit_weight, normalize_graph, threshold_graph
from .ingest import ListMembershipTable, MovieMetadata, parse_memberships, parse_metadata

__version__ = "0.1.0"

__all__ = [
    "ClusterSolution",
    "CoListGraph",
    "ConsensusMatrix",
    "ListMembershipTable",
    "MovieMetadata",
    "build_consensus",
    "build_raw_graph",
    "cluster",
    "cocit_weight",
    "final_clusters",
    "lfm_cluster",
    "load_external_clustering",
    "normalize_graph",
    "parse_memberships",
    "parse_metadata",
    "threshold_graph",
]
