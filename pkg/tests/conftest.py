import pytest

from colisted.ingest import ListMembershipTable, MovieMetadata

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, text = mark.args
    status = _CRITERIA.get(n, (text, "PASS"))[1]
    if rep.skipped and rep.when in ("setup", "call"):
        status = "SKIP" if status == "PASS" else status
    elif rep.failed:
        status = "FAIL"
    _CRITERIA[n] = (text, status)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        text, status = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {status:4s} {text}")


def table_from_lists(lists):
    """{list_id: iterable of movies} -> ListMembershipTable."""
    return ListMembershipTable.from_rows((l, m) for l, ms in lists.items() for m in ms)


@pytest.fixture
def toy_table():
    return table_from_lists({"L1": "ABC", "L2": "AB"})


@pytest.fixture
def genre_meta():
    """100 movies, 10 of which are Westerns."""
    meta = {}
    for i in range(100):
        mid = f"m{i:03d}"
        meta[mid] = MovieMetadata(
            mid,
            type="feature film",
            genres=frozenset({"Western" if i < 10 else "Drama"}),
        )
    return meta
