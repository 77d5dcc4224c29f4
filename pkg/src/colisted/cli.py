"""Command line entry point: ``colisted <command> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import analytics, graph, ingest, pipeline
from .base_cluster import load_external_clustering
from .errors import PipelineError
from .synthetic import write_fixture

log = logging.getLogger("colisted")


def _add_format(p):
    p.add_argument("--format", choices=["tsv", "jsonl"], default=None, help="input file format (default tsv)")


def _add_filters(p):
    p.add_argument("--min-list-size", type=int, default=None)
    p.add_argument("--max-list-size", type=int, default=None)
    p.add_argument("--min-movie-lists", type=int, default=None)


def _add_consensus(p):
    p.add_argument("--runs", type=int, default=None, help="ensemble size r (default 100)")
    p.add_argument("--fraction", type=float, default=None, help="node sample fraction per run (default 0.8)")
    p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    p.add_argument("--min-cluster-size", type=int, default=None)
    p.add_argument("--workers", type=int, default=None, help="parallel runs; 0 = all cores")
    p.add_argument("--normalization", choices=["runs", "cosampled"], default=None)


def _add_enrich(p):
    p.add_argument("--enrich-threshold", type=float, default=None)
    p.add_argument("--universe", choices=["clustered", "all"], default=None)
    p.add_argument("--exclude-missing", action="store_true", default=None)
    p.add_argument("--no-figures", dest="figures", action="store_false", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="colisted", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the whole pipeline")
    p.add_argument("--config", help="key=value configuration file (e.g. a previous manifest.txt)")
    p.add_argument("--memberships")
    p.add_argument("--metadata")
    p.add_argument("--out")
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--stats-only", action="store_true", default=None)
    p.add_argument("--no-enrich", dest="enrich", action="store_false", default=None)
    p.add_argument("--top-k", type=int, default=None)
    _add_format(p)
    _add_filters(p)
    _add_consensus(p)
    _add_enrich(p)

    p = sub.add_parser("ingest", help="parse and filter memberships")
    p.add_argument("--memberships", required=True)
    p.add_argument("--out", required=True)
    _add_format(p)
    _add_filters(p)

    p = sub.add_parser("graph", help="build, normalize and threshold the co-listed graph")
    p.add_argument("--memberships", required=True, help="filtered memberships (tsv)")
    p.add_argument("--out", required=True)
    p.add_argument("--tau", type=float, default=0.1)

    p = sub.add_parser("cluster", help="one base clustering of a graph edge list")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("consensus", help="ensemble consensus clustering")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    _add_consensus(p)

    p = sub.add_parser("enrich", help="score clusters against metadata")
    p.add_argument("--clusters", required=True)
    p.add_argument("--metadata", required=True)
    p.add_argument("--out", required=True)
    _add_format(p)
    _add_enrich(p)

    p = sub.add_parser("stats", help="list-usage statistics (no clustering)")
    p.add_argument("--memberships", required=True)
    p.add_argument("--metadata")
    p.add_argument("--out", required=True)
    p.add_argument("--top-k", type=int, default=20)
    p.add_argument("--no-figures", dest="figures", action="store_false", default=True)
    _add_format(p)

    p = sub.add_parser("export", help="export a cluster subgraph or ego network")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True, help="output .graphml path")
    p.add_argument("--clusters", help="clusters file; required with --select")
    p.add_argument("--select", help="comma separated cluster ids")
    p.add_argument("--ego", help="movie id whose ego network to export")
    p.add_argument("--metadata")
    p.add_argument("--edgelist", help="also write the subgraph as an edge list here")
    _add_format(p)

    p = sub.add_parser("synth", help="write the synthetic fixture data set")
    p.add_argument("--out", required=True)
    _add_format(p)
    p.add_argument("--seed", type=int, default=7)
    return parser


def _or(value, default):
    return default if value is None else value


def _cmd_run(a):
    cfg = pipeline.make_config(
        a.config,
        memberships=a.memberships,
        metadata=a.metadata,
        out=a.out,
        format=a.format,
        min_list_size=a.min_list_size,
        max_list_size=a.max_list_size,
        min_movie_lists=a.min_movie_lists,
        tau=a.tau,
        runs=a.runs,
        fraction=a.fraction,
        seed=a.seed,
        min_cluster_size=a.min_cluster_size,
        enrich_threshold=a.enrich_threshold,
        workers=a.workers,
        normalization=a.normalization,
        universe=a.universe,
        exclude_missing=a.exclude_missing,
        enrich=a.enrich,
        figures=a.figures,
        stats_only=a.stats_only,
        top_k=a.top_k,
    )
    out = pipeline.run_pipeline(cfg)
    print(f"wrote {out}")


def _cmd_export(a):
    g = graph.read_edgelist(a.graph)
    meta = ingest.parse_metadata(a.metadata, _or(a.format, "tsv")) if a.metadata else None
    if a.ego:
        sub, attrs = graph.ego_network(g, a.ego), None
    elif a.select:
        if not a.clusters:
            raise SystemExit("--select needs --clusters")
        sol = load_external_clustering(a.clusters)
        ids = [int(s) for s in a.select.split(",") if s.strip()]
        sub, ann = analytics.cluster_subgraph(g, sol, ids)
        attrs = {n: {"clusters": [str(c) for c in v["clusters"]], "multi": v["multi"]} for n, v in ann.items()}
    else:
        raise SystemExit("export needs --select or --ego")
    graph.write_graphml(sub, a.out, meta, attrs)
    if a.edgelist:
        graph.write_edgelist(sub, a.edgelist)
    print(f"{len(sub.nodes)} nodes, {sub.n_edges} edges -> {a.out}")


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(a.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if a.command == "run":
            _cmd_run(a)
        elif a.command == "ingest":
            pipeline.stage_ingest(
                a.memberships,
                a.out,
                _or(a.format, "tsv"),
                _or(a.min_list_size, 5),
                _or(a.max_list_size, 100),
                _or(a.min_movie_lists, 5),
            )
        elif a.command == "graph":
            pipeline.stage_graph(a.memberships, a.out, a.tau)
        elif a.command == "cluster":
            pipeline.stage_cluster(a.graph, a.out, a.seed)
        elif a.command == "consensus":
            cfg = pipeline.Config()
            pipeline.stage_consensus(
                a.graph,
                a.out,
                _or(a.runs, cfg.runs),
                _or(a.fraction, cfg.fraction),
                _or(a.seed, cfg.seed),
                _or(a.min_cluster_size, cfg.min_cluster_size),
                pipeline.Config(workers=_or(a.workers, 0)).resolved_workers(),
                _or(a.normalization, cfg.normalization),
            )
        elif a.command == "enrich":
            pipeline.stage_enrich(
                a.clusters,
                a.metadata,
                a.out,
                _or(a.format, "tsv"),
                _or(a.enrich_threshold, 0.8),
                _or(a.universe, "clustered"),
                bool(a.exclude_missing),
                _or(a.figures, True),
            )
        elif a.command == "stats":
            pipeline.stage_stats(a.memberships, a.metadata, a.out, _or(a.format, "tsv"), a.top_k, a.figures)
        elif a.command == "export":
            _cmd_export(a)
        elif a.command == "synth":
            mp, dp = write_fixture(a.out, _or(a.format, "tsv"), seed=a.seed)
            print(f"wrote {mp} and {dp}")
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
