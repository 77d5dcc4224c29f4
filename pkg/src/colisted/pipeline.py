"""End-to-end pipeline built from file-to-file stages.

Every stage reads its inputs from disk and writes its outputs to disk, so
running the stages one at a time gives the same files as :func:`run_pipeline`.
Outputs are first written with a ``.partial`` suffix and renamed once the
stage has finished; a failing stage leaves its ``.partial`` files behind.
"""

from __future__ import annotations

import json
import logging
import os
from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import analytics, consensus, enrichment, graph, ingest
from .base_cluster import cluster as base_cluster, load_external_clustering, write_clustering
from .errors import ContractError, PipelineError

log = logging.getLogger(__name__)


@dataclass
class Config:
    memberships: str | None = None
    metadata: str | None = None
    out: str = "out"
    format: str = "tsv"
    min_list_size: int = 5
    max_list_size: int = 100
    min_movie_lists: int = 5
    tau: float = 0.1
    runs: int = 100
    fraction: float = 0.8
    seed: int = 0
    min_cluster_size: int = 3
    enrich_threshold: float = 0.8
    workers: int = 0
    normalization: str = "runs"
    universe: str = "clustered"
    exclude_missing: bool = False
    enrich: bool = True
    figures: bool = True
    stats_only: bool = False
    top_k: int = 20

    def resolved_workers(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)


_TYPES = {f.name: f.type for f in fields(Config)}
# manifest keys that are informational only
_INFO_KEYS = {"run_seeds", "final_seed"}


def _coerce(key, raw):
    kind = _TYPES[key]
    if kind == "bool":
        if isinstance(raw, bool):
            return raw
        low = str(raw).strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ContractError(f"{key}: expected a boolean, got {raw!r}")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if raw in ("", None):
        return None
    return str(raw)


def read_config(path) -> dict:
    """Parse flat ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ContractError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key in _INFO_KEYS:
            continue
        if key not in _TYPES:
            raise ContractError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def make_config(file=None, **overrides) -> Config:
    values = read_config(file) if file else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return Config(**values)


def write_manifest(cfg: Config, path):
    lines = []
    for k, v in asdict(cfg).items():
        if k == "out":
            continue
        lines.append(f"{k}={'' if v is None else v}")
    if not cfg.stats_only:
        seeds = ",".join(str(consensus.run_seed(cfg.seed, i)) for i in range(cfg.runs))
        lines.append(f"final_seed={cfg.seed}")
        lines.append(f"run_seeds={seeds}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class _Stage:
    def __init__(self, name, out_dir):
        self.name = name
        self.out_dir = Path(out_dir)
        self.targets: list[Path] = []

    def path(self, rel) -> Path:
        final = self.out_dir / rel
        final.parent.mkdir(parents=True, exist_ok=True)
        self.targets.append(final)
        return final.with_name(final.name + ".partial")

    def commit(self):
        for final in self.targets:
            os.replace(final.with_name(final.name + ".partial"), final)


@contextmanager
def stage(name, out_dir):
    st = _Stage(name, out_dir)
    log.info("stage %s", name)
    try:
        yield st
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, exc) from exc
    st.commit()


def _json_dump(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# -- stages -------------------------------------------------------------------


def stage_ingest(memberships, out_dir, fmt="tsv", min_list_size=5, max_list_size=100, min_movie_lists=5):
    with stage("ingest", out_dir) as st:
        table = ingest.parse_memberships(memberships, fmt)
        filtered = ingest.filter_lists(table, min_list_size, max_list_size)
        filtered = ingest.filter_movies(filtered, min_movie_lists)
        ingest.write_memberships(filtered, st.path("filtered_memberships.tsv"))
        _json_dump(
            {
                "lists": len(table.lists),
                "movies": len(table.movies),
                "memberships": len(table),
                "filtered_lists": len(filtered.lists),
                "filtered_movies": len(filtered.movies),
                "filtered_memberships": len(filtered),
            },
            st.path("ingest.json"),
        )
    return Path(out_dir) / "filtered_memberships.tsv"


def stage_graph(filtered_memberships, out_dir, tau=0.1):
    with stage("graph", out_dir) as st:
        table = ingest.parse_memberships(filtered_memberships, "tsv")
        raw = graph.build_raw_graph(table)
        norm = graph.normalize_graph(raw, table)
        thr = graph.threshold_graph(norm, tau, drop_isolated=True)
        graph.write_edgelist(raw, st.path("raw_graph.tsv"))
        graph.write_edgelist(norm, st.path("normalized_graph.tsv"))
        graph.write_edgelist(thr, st.path("graph.tsv"))
        comps = graph.connected_components(thr)
        _json_dump(
            {
                "nodes": len(raw.nodes),
                "raw_edges": raw.n_edges,
                "tau": tau,
                "thresholded_nodes": len(thr.nodes),
                "thresholded_edges": thr.n_edges,
                "components": len(comps),
                "giant_component_fraction": len(comps[0]) / len(thr.nodes) if comps else 0.0,
            },
            st.path("graph_stats.json"),
        )
    return Path(out_dir) / "graph.tsv"


def stage_cluster(graph_path, out_dir, seed=0):
    with stage("cluster", out_dir) as st:
        g = graph.read_edgelist(graph_path)
        write_clustering(base_cluster(g, seed), st.path("base_clusters.txt"))
    return Path(out_dir) / "base_clusters.txt"


def stage_consensus(
    graph_path,
    out_dir,
    runs=100,
    fraction=0.8,
    seed=0,
    min_cluster_size=3,
    workers=1,
    normalization="runs",
):
    with stage("consensus", out_dir) as st:
        g = graph.read_edgelist(graph_path)
        m = consensus.build_consensus(
            g, runs, fraction, base_cluster, seed, workers=workers, normalization=normalization
        )
        sol = consensus.final_clusters(m, base_cluster, seed, min_cluster_size)
        consensus.write_matrix(m, st.path("consensus_matrix.tsv"))
        write_clustering(sol, st.path("clusters.txt"))
        report = consensus.overlap_report(sol)
        report["graph_nodes"] = len(g.nodes)
        _json_dump(report, st.path("clusters.json"))
    return Path(out_dir) / "clusters.txt"


def stage_enrich(
    clusters_path,
    metadata,
    out_dir,
    fmt="tsv",
    threshold=0.8,
    universe="clustered",
    exclude_missing=False,
    figures=True,
):
    with stage("enrichment", out_dir) as st:
        if not metadata:
            raise ContractError("enrichment requested but no metadata file given")
        if not Path(metadata).exists():
            raise FileNotFoundError(f"metadata file not found: {metadata}")
        meta = ingest.parse_metadata(metadata, fmt)
        sol = load_external_clustering(clusters_path)
        if not len(sol):
            raise ContractError("no clusters to score")
        if universe == "clustered":
            uni = sol.members
        elif universe == "all":
            uni = frozenset(meta) | sol.members
        else:
            raise ContractError(f"unknown universe {universe!r}")
        report = enrichment.enrichment_report(sol.clusters, meta, uni, exclude_missing)
        enrichment.write_report_csv(report, st.path("enrichment.csv"))

        curves = {a: enrichment.curve_from_scores(report.scores(a)) for a in ingest.ATTRIBUTES}
        with open(st.path("coverage_curves.csv"), "w", encoding="utf-8") as fh:
            fh.write("attribute,threshold,percent\n")
            for a, curve in curves.items():
                for t, pct in curve:
                    fh.write(f"{a},{t:.1f},{pct:.6f}\n")

        levels = enrichment.DEFAULT_THRESHOLDS
        multi = {t: enrichment.multi_curve_from_report(report, t) for t in levels}
        with open(st.path("multi_attribute_curve.csv"), "w", encoding="utf-8") as fh:
            fh.write("threshold,attributes,percent\n")
            for t, curve in multi.items():
                for x, pct in curve:
                    fh.write(f"{t:.1f},{x},{pct:.6f}\n")

        summaries = enrichment.summarize_report(report, threshold)
        with open(st.path("summaries.tsv"), "w", encoding="utf-8") as fh:
            fh.write("cluster_id\tsize\tsummary\n")
            for ce, text in zip(report.clusters, summaries):
                fh.write(f"{ce.cluster_id}\t{ce.size}\t{text}\n")

        if figures:
            from . import plotting

            plotting.plot_coverage_curves(curves, st.path("figures/coverage_curves.png"))
            plotting.plot_multi_attribute_curves(
                {t: multi[t] for t in (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)},
                st.path("figures/multi_attribute_curves.png"),
            )
    return Path(out_dir) / "enrichment.csv"


def stage_stats(memberships, metadata, out_dir, fmt="tsv", top_k=20, figures=True):
    with stage("stats", out_dir) as st:
        table = ingest.parse_memberships(memberships, fmt)
        meta = ingest.parse_metadata(metadata, fmt) if metadata else {}
        counts = analytics.list_counts(table)
        aggs = analytics.genre_aggregates(counts, meta)
        analytics.write_movie_counts(counts, meta, st.path("movie_counts.csv"))
        analytics.write_genre_means(aggs, st.path("genre_means.csv"))
        analytics.write_top_k(analytics.top_listed(counts, meta, top_k), st.path("top_k.csv"))
        sizes = [len(ms) for ms in table.lists.values()]
        per_user = {}
        for l, u in table.list_owner.items():
            per_user[u] = per_user.get(u, 0) + 1
        _json_dump(
            {
                "lists": len(table.lists),
                "users": len(per_user),
                "movies": len(counts),
                "memberships": len(table),
                "mean_lists_per_movie": sum(counts.values()) / len(counts) if counts else 0.0,
                "mean_movies_per_list": sum(sizes) / len(sizes) if sizes else 0.0,
                "rating_list_count_pearson": analytics.rating_correlation(counts, meta),
            },
            st.path("stats.json"),
        )
        if figures and meta:
            from . import plotting

            plotting.plot_counts_vs_rating(counts, meta, st.path("figures/counts_vs_rating.png"))
            plotting.plot_genre_means(aggs, st.path("figures/genre_means.png"))
    return Path(out_dir) / "stats.json"


def run_pipeline(cfg: Config) -> Path:
    """Run every stage into ``cfg.out`` and write ``manifest.txt``."""
    if not cfg.memberships:
        raise ContractError("no memberships file configured")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(cfg, out / "manifest.txt")

    if cfg.stats_only:
        stage_stats(cfg.memberships, cfg.metadata, out / "stats", cfg.format, cfg.top_k, cfg.figures)
        return out
    filtered = stage_ingest(
        cfg.memberships, out, cfg.format, cfg.min_list_size, cfg.max_list_size, cfg.min_movie_lists
    )
    gpath = stage_graph(filtered, out, cfg.tau)
    cpath = stage_consensus(
        gpath,
        out,
        cfg.runs,
        cfg.fraction,
        cfg.seed,
        cfg.min_cluster_size,
        cfg.resolved_workers(),
        cfg.normalization,
    )
    if cfg.enrich:
        stage_enrich(
            cpath,
            cfg.metadata,
            out,
            cfg.format,
            cfg.enrich_threshold,
            cfg.universe,
            cfg.exclude_missing,
            cfg.figures,
        )
    stage_stats(cfg.memberships, cfg.metadata, out / "stats", cfg.format, cfg.top_k, cfg.figures)
    return out
