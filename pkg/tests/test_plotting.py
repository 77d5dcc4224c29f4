from colisted import plotting
from colisted.ingest import MovieMetadata


def test_figures_render_deterministically(tmp_path):
    meta = {str(i): MovieMetadata(str(i), genres=frozenset({"Drama"}), rating=5.0 + i % 4) for i in range(20)}
    counts = {str(i): 1 + i for i in range(20)}
    curves = {"genres": [(0.1, 100.0), (0.5, 60.0), (1.0, 10.0)], "type": [(0.1, 80.0), (1.0, 0.0)]}
    outputs = []
    for run in ("a", "b"):
        d = tmp_path / run
        d.mkdir()
        plotting.plot_counts_vs_rating(counts, meta, d / "scatter.png")
        plotting.plot_genre_means({"Drama": (10.0, 6.5), "Noir": (3.0, None)}, d / "genres.png")
        plotting.plot_coverage_curves(curves, d / "coverage.png")
        plotting.plot_multi_attribute_curves({0.8: [(0, 100.0), (1, 50.0)]}, d / "multi.png")
        outputs.append({p.name: p.read_bytes() for p in d.iterdir()})
    assert outputs[0] == outputs[1]
    assert all(b.startswith(b"\x89PNG") for b in outputs[0].values())
