"""Chance-corrected enrichment of clusters over categorical metadata."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ContractError
from .ingest import ATTRIBUTES, MovieMetadata

# order in which enriched values appear in a summary
SUMMARY_ORDER = ("genres", "type", "languages", "countries", "decade", "directors", "actors")

DEFAULT_THRESHOLDS = tuple(round(0.1 * i, 10) for i in range(1, 11))

_NO_VALUES = frozenset()


def _check_attribute(attribute):
    if attribute not in ATTRIBUTES:
        raise ContractError(f"unknown attribute {attribute!r}; expected one of {ATTRIBUTES}")


def _values(meta, movie_id, attribute):
    m = meta.get(movie_id)
    return _NO_VALUES if m is None else m.values(attribute)


def _known(meta, movies, attribute):
    return [m for m in movies if _values(meta, m, attribute)]


def enrichment(cluster, meta: Mapping[str, MovieMetadata], attribute, value, exclude_missing=False) -> float:
    """Fraction of the cluster's movies carrying ``value``.

    Movies without metadata count as non-matching unless
    ``exclude_missing`` drops them from the denominator.
    """
    _check_attribute(attribute)
    if not cluster:
        raise ContractError("enrichment of an empty cluster")
    members = _known(meta, cluster, attribute) if exclude_missing else list(cluster)
    if not members:
        return 0.0
    hits = sum(1 for m in members if value in _values(meta, m, attribute))
    return hits / len(members)


def expected_enrichment(meta, universe, attribute, value, exclude_missing=False) -> float:
    """Background rate of ``value`` over ``universe``."""
    if not universe:
        raise ContractError("empty universe")
    return enrichment(universe, meta, attribute, value, exclude_missing)


def corrected_enrichment(e: float, expected: float) -> float:
    """Hubert-Arabie style adjustment, ``(e - expected) / (1 - expected)``.

    A value carried by the whole universe (``expected == 1``) scores 0.
    """
    if expected >= 1.0:
        return 0.0
    return (e - expected) / (1.0 - expected)


def best_value(scores: Mapping[str, float]):
    """Highest-scoring value; ties go to the lexicographically smallest."""
    if not scores:
        return None, 0.0
    value = min(scores, key=lambda v: (-scores[v], v))
    return value, scores[value]


class Background:
    """Value frequencies over a universe, computed once and reused per cluster."""

    def __init__(self, meta, universe: Iterable, exclude_missing=False):
        self.meta = meta
        self.universe = frozenset(universe)
        if not self.universe:
            raise ContractError("empty universe")
        self.exclude_missing = exclude_missing
        self.counts: dict[str, Counter] = {}
        self.denominators: dict[str, int] = {}
        for a in ATTRIBUTES:
            c = Counter()
            known = 0
            for m in self.universe:
                vals = _values(meta, m, a)
                if vals:
                    known += 1
                c.update(vals)
            self.counts[a] = c
            self.denominators[a] = known if exclude_missing else len(self.universe)

    def expected(self, attribute, value) -> float:
        d = self.denominators[attribute]
        return self.counts[attribute][value] / d if d else 0.0

    def fractions(self) -> dict[tuple[str, str], float]:
        return {
            (a, v): self.expected(a, v)
            for a in ATTRIBUTES
            for v in sorted(self.counts[a])
        }

    def cluster_scores(self, cluster, attribute) -> dict[str, tuple[float, float, float]]:
        """value -> (raw, expected, corrected) for every value seen in the cluster."""
        _check_attribute(attribute)
        if not cluster:
            raise ContractError("enrichment of an empty cluster")
        c = Counter()
        known = 0
        for m in cluster:
            vals = _values(self.meta, m, attribute)
            if vals:
                known += 1
            c.update(vals)
        n = known if self.exclude_missing else len(cluster)
        out = {}
        for v, hits in c.items():
            e = hits / n
            x = self.expected(attribute, v)
            out[v] = (e, x, corrected_enrichment(e, x))
        return out

    def max_corrected(self, cluster, attribute):
        scores = self.cluster_scores(cluster, attribute)
        return best_value({v: s[2] for v, s in scores.items()})


def max_corrected(cluster, meta, attribute, universe=None, exclude_missing=False):
    """(value, score) maximising corrected enrichment for ``attribute``.

    ``universe`` defaults to every movie in ``meta``. Returns ``(None, 0.0)``
    when no member of the cluster has a value for the attribute.
    """
    universe = meta.keys() if universe is None else universe
    return Background(meta, universe, exclude_missing).max_corrected(cluster, attribute)


@dataclass
class ClusterEnrichment:
    cluster_id: int
    size: int
    # attribute -> (best_value, raw, expected, corrected)
    best: dict = field(default_factory=dict)
    # attribute -> {value: corrected}
    corrected: dict = field(default_factory=dict)

    def max_score(self, attribute) -> float:
        return self.best[attribute][3]


@dataclass
class EnrichmentReport:
    clusters: list[ClusterEnrichment]
    background: dict
    universe_size: int

    def scores(self, attribute) -> list[float]:
        return [c.max_score(attribute) for c in self.clusters]


def enrichment_report(clusters, meta, universe=None, exclude_missing=False) -> EnrichmentReport:
    """Score every cluster on every attribute.

    ``universe`` defaults to the movies covered by ``clusters``.
    """
    clusters = [frozenset(c) for c in clusters]
    if universe is None:
        universe = frozenset().union(*clusters) if clusters else frozenset()
    bg = Background(meta, universe, exclude_missing)
    rows = []
    for cid, members in enumerate(clusters):
        ce = ClusterEnrichment(cid, len(members))
        for a in ATTRIBUTES:
            scores = bg.cluster_scores(members, a)
            corr = {v: s[2] for v, s in scores.items()}
            value, score = best_value(corr)
            if value is None:
                ce.best[a] = (None, 0.0, 0.0, 0.0)
            else:
                e, x, _ = scores[value]
                ce.best[a] = (value, e, x, score)
            ce.corrected[a] = corr
        rows.append(ce)
    return EnrichmentReport(rows, bg.fractions(), len(bg.universe))


def _percent(hits, total):
    return 100.0 * hits / total


def coverage_curve(clusters, meta, attribute, thresholds=DEFAULT_THRESHOLDS, universe=None, exclude_missing=False):
    """Percentage of clusters whose max corrected enrichment reaches each threshold."""
    clusters = list(clusters)
    if not clusters:
        raise ContractError("coverage curve over no clusters")
    if any(not 0.0 <= t <= 1.0 for t in thresholds):
        raise ContractError("thresholds must lie in [0, 1]")
    report = enrichment_report(clusters, meta, universe, exclude_missing)
    return curve_from_scores(report.scores(attribute), thresholds)


def curve_from_scores(scores, thresholds=DEFAULT_THRESHOLDS):
    scores = list(scores)
    return [(t, _percent(sum(1 for s in scores if s >= t), len(scores))) for t in thresholds]


def multi_attribute_curve(clusters, meta, t=0.8, attribute_counts=None, universe=None, exclude_missing=False):
    """Percentage of clusters with at least X attributes enriched at level ``t``."""
    if not 0.0 <= t <= 1.0:
        raise ContractError(f"t must lie in [0, 1], got {t}")
    clusters = list(clusters)
    if not clusters:
        return [(x, 0.0) for x in (attribute_counts or range(len(ATTRIBUTES) + 1))]
    report = enrichment_report(clusters, meta, universe, exclude_missing)
    return multi_curve_from_report(report, t, attribute_counts)


def multi_curve_from_report(report: EnrichmentReport, t=0.8, attribute_counts=None):
    if attribute_counts is None:
        attribute_counts = range(len(ATTRIBUTES) + 1)
    n_enriched = [sum(1 for a in ATTRIBUTES if c.max_score(a) >= t) for c in report.clusters]
    return [(x, _percent(sum(1 for n in n_enriched if n >= x), len(n_enriched))) for x in attribute_counts]


# -- summaries ----------------------------------------------------------------

_TYPE_PLURALS = {
    "documentary": "documentaries",
    "TV series": "TV series",
    "mini-series": "mini-series",
}


def _plural(kind):
    return _TYPE_PLURALS.get(kind, kind + "s")


def _and(values):
    values = list(values)
    if len(values) <= 1:
        return "".join(values)
    return ", ".join(values[:-1]) + " and " + values[-1]


def _decade(v):
    return f"{v}s" if v.isdigit() else v


def summarize_enriched(enriched: Mapping[str, Iterable[str]]) -> str:
    """Render a summary from attribute -> enriched values."""
    vals = {a: sorted(enriched.get(a, ())) for a in SUMMARY_ORDER}
    if not any(vals.values()):
        return ""
    noun = _and(_plural(v) for v in vals["type"]) if vals["type"] else "movies"
    parts = []
    if vals["genres"]:
        parts.append(" ".join(vals["genres"]))
    parts.append(noun)
    if vals["languages"]:
        parts.append("in " + _and(vals["languages"]))
    if vals["countries"]:
        parts.append("from " + _and(vals["countries"]))
    if vals["decade"]:
        parts.append("from the " + _and(_decade(v) for v in vals["decade"]))
    if vals["directors"]:
        parts.append("directed by " + _and(vals["directors"]))
    if vals["actors"]:
        parts.append("featuring " + _and(vals["actors"]))
    text = " ".join(parts)
    return text[0].upper() + text[1:]


def summarize_cluster(cluster, meta, t=0.8, universe=None, exclude_missing=False) -> str:
    """Template summary built from every value whose corrected enrichment is >= t."""
    universe = meta.keys() if universe is None else universe
    bg = Background(meta, universe, exclude_missing)
    return summarize_enriched(_enriched_values(bg, cluster, t))


def _enriched_values(bg: Background, cluster, t):
    out = {}
    for a in SUMMARY_ORDER:
        scores = bg.cluster_scores(cluster, a)
        out[a] = [v for v, s in scores.items() if s[2] >= t]
    return out


def summarize_report(report: EnrichmentReport, t=0.8) -> list[str]:
    out = []
    for ce in report.clusters:
        out.append(
            summarize_enriched({a: [v for v, s in ce.corrected[a].items() if s >= t] for a in SUMMARY_ORDER})
        )
    return out


def write_report_csv(report: EnrichmentReport, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cluster_id", "size", "attribute", "best_value", "raw_enrichment", "expected", "corrected"])
        for ce in report.clusters:
            for a in ATTRIBUTES:
                value, e, x, c = ce.best[a]
                w.writerow([ce.cluster_id, ce.size, a, value or "", f"{e:.6f}", f"{x:.6f}", f"{c:.6f}"])
