import random

import pytest

from colisted.analytics import (
    cluster_subgraph,
    genre_aggregates,
    list_counts,
    pearson,
    rating_correlation,
    top_listed,
    write_genre_means,
    write_movie_counts,
    write_top_k,
)
from colisted.base_cluster import ClusterSolution
from colisted.errors import ContractError
from colisted.graph import NORMALIZED, CoListGraph
from colisted.ingest import MovieMetadata

from conftest import table_from_lists


def test_list_counts():
    t = table_from_lists({"L1": "AB", "L2": "A", "L3": "AC"})
    counts = list_counts(t)
    assert counts["A"] == 3
    assert counts.get("Z", 0) == 0
    assert sum(counts.values()) == len(t)


def test_top_listed_order_and_join():
    counts = {"b": 5, "a": 5, "c": 9, "d": 1}
    meta = {"c": MovieMetadata("c", rating=9.0, title="The Dark Knight")}
    rows = top_listed(counts, meta, 3)
    assert rows == [("c", "The Dark Knight", 9, 9.0), ("a", None, 5, None), ("b", None, 5, None)]
    assert len(top_listed(counts, meta, 100)) == 4
    assert top_listed(counts, meta, 3) == rows
    with pytest.raises(ContractError):
        top_listed(counts, meta, 0)


def test_genre_aggregates():
    meta = {
        "a": MovieMetadata("a", genres=frozenset({"Drama"}), rating=6.0),
        "b": MovieMetadata("b", genres=frozenset({"Drama", "Horror"}), rating=8.0),
        "c": MovieMetadata("c", genres=frozenset({"Noir"})),
    }
    aggs = genre_aggregates({"a": 2, "b": 4, "c": 7}, meta)
    assert aggs["Drama"] == (3.0, 7.0)
    assert aggs["Horror"] == (4.0, 8.0)
    assert aggs["Noir"] == (7.0, None)


def test_genre_aggregates_brute_force():
    rnd = random.Random(1)
    genres = ["A", "B", "C", "D"]
    meta, counts = {}, {}
    for i in range(200):
        mid = f"m{i}"
        counts[mid] = rnd.randint(1, 50)
        meta[mid] = MovieMetadata(
            mid,
            genres=frozenset(rnd.sample(genres, rnd.randint(0, 3))),
            rating=None if rnd.random() < 0.2 else rnd.randint(10, 100) / 10,
        )
    aggs = genre_aggregates(counts, meta)
    for g in genres:
        carriers = [m for m in meta if g in meta[m].genres]
        rated = [meta[m].rating for m in carriers if meta[m].rating is not None]
        assert aggs[g][0] == pytest.approx(sum(counts[m] for m in carriers) / len(carriers), rel=1e-12)
        assert aggs[g][1] == pytest.approx(sum(rated) / len(rated), rel=1e-12)


@pytest.mark.parametrize(
    "x, y, r",
    [([1, 2, 3, 4], [3, 5, 7, 9], 1.0), ([1, 2, 3], [-1, -2, -3], -1.0), ([1, 2, 3], [1, 3, 2], 0.5)],
)
def test_pearson(x, y, r):
    assert pearson(x, y) == pytest.approx(r, abs=1e-12)


def test_pearson_errors():
    with pytest.raises(ValueError, match="constant"):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(ContractError):
        pearson([1], [1])
    with pytest.raises(ContractError):
        pearson([1, 2], [1, 2, 3])


def test_rating_correlation():
    meta = {str(i): MovieMetadata(str(i), rating=float(i)) for i in range(1, 6)}
    assert rating_correlation({str(i): 2 * i for i in range(1, 6)}, meta) == pytest.approx(1.0)
    assert rating_correlation({"1": 3}, meta) is None


def _graph():
    e = {("A", "B"): 0.5, ("A", "C"): 0.5, ("B", "C"): 0.5, ("C", "D"): 0.2, ("X", "Y"): 0.9}
    return CoListGraph(frozenset("ABCDXY"), e, NORMALIZED)


def test_cluster_subgraph_triangle():
    sol = ClusterSolution((frozenset("ABC"), frozenset("XY"), frozenset("CD")))
    sub, ann = cluster_subgraph(_graph(), sol, {0})
    assert sub.nodes == set("ABC")
    assert set(sub.edges) == {("A", "B"), ("A", "C"), ("B", "C")}
    assert ann["A"] == {"clusters": [0], "multi": False}


def test_cluster_subgraph_overlap_and_disjoint():
    sol = ClusterSolution((frozenset("ABC"), frozenset("XY"), frozenset("CD")))
    sub, ann = cluster_subgraph(_graph(), sol, {0, 1, 2})
    assert sub.nodes == set("ABCDXY")
    assert set(sub.edges) <= set(_graph().edges)
    assert ann["C"] == {"clusters": [0, 2], "multi": True}
    sub, _ = cluster_subgraph(_graph(), sol, [0, 1])
    assert ("C", "X") not in sub.edges and len(sub.edges) == 4


def test_cluster_subgraph_errors():
    sol = ClusterSolution((frozenset("AB"),))
    with pytest.raises(KeyError):
        cluster_subgraph(_graph(), sol, {5})
    with pytest.raises(ContractError):
        cluster_subgraph(_graph(), sol, set())


def test_csv_writers(tmp_path):
    meta = {"a": MovieMetadata("a", genres=frozenset({"Drama"}), rating=7.5, title="Alpha")}
    counts = {"a": 3, "b": 1}
    write_movie_counts(counts, meta, tmp_path / "mc.csv")
    assert (tmp_path / "mc.csv").read_text() == "movie_id,lists,rating\na,3,7.5\nb,1,\n"
    write_genre_means(genre_aggregates(counts, meta), tmp_path / "g.csv")
    assert (tmp_path / "g.csv").read_text() == "genre,mean_lists,mean_rating\nDrama,3.000000,7.500000\n"
    write_top_k(top_listed(counts, meta, 2), tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text().splitlines()[1] == "1,a,Alpha,3,7.5"
