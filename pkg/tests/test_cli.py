import json
import shutil

import networkx as nx
import pytest

from colisted import pipeline
from colisted.cli import main
from colisted.errors import PipelineError
from colisted.synthetic import bundled_fixture, make_fixture, write_fixture

FAST = ["--runs", "10", "--workers", "1", "--no-figures"]


@pytest.fixture(scope="module")
def fixture_files():
    return bundled_fixture()


def _tree(d):
    return {str(p.relative_to(d)): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


def _manifest(d):
    return dict(l.split("=", 1) for l in (d / "manifest.txt").read_text().splitlines())


def test_bundled_fixture_is_current(tmp_path, fixture_files):
    mp, dp = write_fixture(tmp_path)
    assert mp.read_bytes() == fixture_files[0].read_bytes()
    assert dp.read_bytes() == fixture_files[1].read_bytes()


def test_default_manifest(tmp_path, fixture_files):
    mp, dp = fixture_files
    out = tmp_path / "out"
    assert main(["run", "--memberships", str(mp), "--metadata", str(dp), "--out", str(out), "--workers", "1"]) == 0
    man = _manifest(out)
    expected = {
        "min_list_size": "5",
        "max_list_size": "100",
        "min_movie_lists": "5",
        "tau": "0.1",
        "runs": "100",
        "fraction": "0.8",
        "min_cluster_size": "3",
        "enrich_threshold": "0.8",
        "seed": "0",
    }
    assert {k: man[k] for k in expected} == expected
    assert len(man["run_seeds"].split(",")) == 100
    for name in (
        "filtered_memberships.tsv",
        "raw_graph.tsv",
        "normalized_graph.tsv",
        "graph.tsv",
        "consensus_matrix.tsv",
        "clusters.txt",
        "clusters.json",
        "enrichment.csv",
        "coverage_curves.csv",
        "multi_attribute_curve.csv",
        "summaries.tsv",
        "figures/coverage_curves.png",
        "stats/movie_counts.csv",
        "stats/genre_means.csv",
        "stats/top_k.csv",
        "stats/figures/counts_vs_rating.png",
    ):
        assert (out / name).is_file(), name
    assert not list(out.rglob("*.partial"))
    report = json.loads((out / "clusters.json").read_text())
    assert report["n_clusters"] >= 6
    assert report["min_size"] >= 3


def test_fixture_latent_groups_recovered(tmp_path, fixture_files):
    mp, dp = fixture_files
    out = tmp_path / "out"
    main(["run", "--memberships", str(mp), "--metadata", str(dp), "--out", str(out), *FAST])
    _, _, groups = make_fixture()
    found = [frozenset(l.split()) for l in (out / "clusters.txt").read_text().splitlines()]
    for g in groups:
        best = max(2 * len(g & f) / (len(g) + len(f)) for f in found)
        assert best >= 0.8


def test_rerun_from_manifest(tmp_path, fixture_files):
    mp, dp = fixture_files
    a, b = tmp_path / "a", tmp_path / "b"
    main(["run", "--memberships", str(mp), "--metadata", str(dp), "--out", str(a), "--seed", "5", *FAST])
    assert main(["run", "--config", str(a / "manifest.txt"), "--out", str(b)]) == 0
    assert _tree(a) == _tree(b)


def test_stages_compose(tmp_path, fixture_files):
    mp, dp = fixture_files
    full = tmp_path / "full"
    main(["run", "--memberships", str(mp), "--metadata", str(dp), "--out", str(full), "--seed", "3", *FAST])

    st = tmp_path / "stages"
    assert main(["ingest", "--memberships", str(mp), "--out", str(st)]) == 0
    assert main(["graph", "--memberships", str(st / "filtered_memberships.tsv"), "--out", str(st)]) == 0
    assert (
        main(["consensus", "--graph", str(st / "graph.tsv"), "--out", str(st), "--runs", "10", "--seed", "3", "--workers", "1"])
        == 0
    )
    assert (
        main(["enrich", "--clusters", str(st / "clusters.txt"), "--metadata", str(dp), "--out", str(st), "--no-figures"])
        == 0
    )
    assert main(["stats", "--memberships", str(mp), "--metadata", str(dp), "--out", str(st / "stats"), "--no-figures"]) == 0
    staged, piped = _tree(st), _tree(full)
    piped.pop("manifest.txt")
    assert staged == piped


def test_missing_metadata_aborts_at_enrichment(tmp_path, fixture_files, capsys):
    mp, _ = fixture_files
    out = tmp_path / "out"
    rc = main(["run", "--memberships", str(mp), "--metadata", str(tmp_path / "nope.tsv"), "--out", str(out), *FAST])
    assert rc == 1
    assert "stage 'enrichment' failed" in capsys.readouterr().err
    assert (out / "clusters.txt").exists()
    assert not (out / "enrichment.csv").exists()


def test_no_metadata_without_enrichment(tmp_path, fixture_files):
    mp, _ = fixture_files
    out = tmp_path / "out"
    assert main(["run", "--memberships", str(mp), "--out", str(out), "--no-enrich", *FAST]) == 0
    assert (out / "clusters.txt").exists()
    assert not (out / "enrichment.csv").exists()


def test_partial_suffix_on_failure(tmp_path):
    with pytest.raises(PipelineError, match="stage 'demo'"):
        with pipeline.stage("demo", tmp_path) as st:
            st.path("a.txt").write_text("half")
            raise ValueError("boom")
    assert (tmp_path / "a.txt.partial").read_text() == "half"
    assert not (tmp_path / "a.txt").exists()


def test_stats_only(tmp_path, fixture_files):
    mp, dp = fixture_files
    out = tmp_path / "out"
    assert main(["run", "--memberships", str(mp), "--metadata", str(dp), "--out", str(out), "--stats-only", "--no-figures"]) == 0
    assert (out / "stats" / "top_k.csv").exists()
    assert not (out / "graph.tsv").exists()
    stats = json.loads((out / "stats" / "stats.json").read_text())
    assert stats["memberships"] == sum(1 for _ in mp.open())
    assert "run_seeds" not in _manifest(out)


def test_jsonl_inputs_match_tsv(tmp_path):
    t, j = tmp_path / "t", tmp_path / "j"
    write_fixture(t, "tsv")
    write_fixture(j, "jsonl")
    main(["run", "--memberships", str(t / "memberships.tsv"), "--metadata", str(t / "metadata.tsv"), "--out", str(t / "o"), *FAST])
    main(
        [
            "run", "--format", "jsonl",
            "--memberships", str(j / "memberships.jsonl"), "--metadata", str(j / "metadata.jsonl"),
            "--out", str(j / "o"), *FAST,
        ]
    )
    for name in ("clusters.txt", "enrichment.csv", "summaries.tsv"):
        assert (t / "o" / name).read_bytes() == (j / "o" / name).read_bytes()


def test_config_file_and_flag_override(tmp_path, fixture_files):
    mp, dp = fixture_files
    cfg = tmp_path / "c.conf"
    cfg.write_text(f"# test config\nmemberships={mp}\nmetadata={dp}\ntau=0.2\nruns=4\nworkers=1\nfigures=false\n")
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--runs", "3"]) == 0
    man = _manifest(out)
    assert man["tau"] == "0.2" and man["runs"] == "3"
    assert json.loads((out / "graph_stats.json").read_text())["tau"] == 0.2


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "c.conf"
    cfg.write_text("bogus=1\n")
    assert main(["run", "--config", str(cfg)]) == 1


def test_cluster_and_export(tmp_path, fixture_files):
    mp, dp = fixture_files
    out = tmp_path / "o"
    main(["run", "--memberships", str(mp), "--metadata", str(dp), "--out", str(out), *FAST])
    assert main(["cluster", "--graph", str(out / "graph.tsv"), "--out", str(out)]) == 0
    assert (out / "base_clusters.txt").read_text().strip()

    gml = tmp_path / "sub.graphml"
    el = tmp_path / "sub.tsv"
    rc = main(
        [
            "export", "--graph", str(out / "graph.tsv"), "--clusters", str(out / "clusters.txt"),
            "--select", "0,1", "--metadata", str(dp), "--out", str(gml), "--edgelist", str(el),
        ]
    )
    assert rc == 0
    g = nx.read_graphml(gml)
    clusters = (out / "clusters.txt").read_text().splitlines()
    assert set(g.nodes) == set(clusters[0].split()) | set(clusters[1].split())
    assert all("clusters" in d and "genres" in d for _, d in g.nodes(data=True))
    assert len(el.read_text().splitlines()) == g.number_of_edges()

    movie = clusters[0].split()[0]
    assert main(["export", "--graph", str(out / "graph.tsv"), "--ego", movie, "--out", str(gml)]) == 0
    assert movie in nx.read_graphml(gml)
    assert main(["export", "--graph", str(out / "graph.tsv"), "--ego", "nope", "--out", str(gml)]) == 1


def test_synth_command(tmp_path):
    assert main(["synth", "--out", str(tmp_path / "fx"), "--format", "jsonl"]) == 0
    assert (tmp_path / "fx" / "memberships.jsonl").exists()


def test_parse_error_reported(tmp_path, capsys):
    bad = tmp_path / "m.tsv"
    bad.write_text("L1\tU\tA\nL1\tB\n")
    assert main(["ingest", "--memberships", str(bad), "--out", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert "stage 'ingest'" in err and ":2" in err


def test_module_entry_point(tmp_path, fixture_files):
    import subprocess
    import sys

    mp, _ = fixture_files
    shutil.copy(mp, tmp_path / "m.tsv")
    r = subprocess.run(
        [sys.executable, "-m", "colisted", "ingest", "--memberships", str(tmp_path / "m.tsv"), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "filtered_memberships.tsv").exists()
