from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

_criteria: dict[str, tuple[int, str]] = {}
_outcomes: dict[int, list[str]] = {}
_details: dict[int, list[str]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _criteria[item.nodeid] = (mark.args[0], mark.args[1])


def pytest_runtest_logreport(report):
    if report.nodeid not in _criteria:
        return
    number, _ = _criteria[report.nodeid]
    if report.when == "call" or report.outcome == "failed":
        _outcomes.setdefault(number, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    titles = {n: t for n, t in _criteria.values()}
    terminalreporter.section("acceptance criteria")
    for number in sorted(titles):
        results = _outcomes.get(number, [])
        if not results:
            status = "NOT RUN"
        elif all(r == "passed" for r in results):
            status = "PASS"
        elif any(r == "failed" for r in results):
            status = "FAIL"
        else:
            status = "SKIP"
        terminalreporter.write_line(f"criterion {number:2d} {status:7s} {titles[number]}")
        for line in _details.get(number, []):
            terminalreporter.write_line(f"              {line}")


@pytest.fixture
def pdb_dir() -> Path:
    return DATA / "pdb"


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(12345)


@pytest.fixture
def measured(request):
    """Attach a measured-value line to the criterion summary of the running test."""
    mark = request.node.get_closest_marker("criterion")

    def note(text: str) -> None:
        if mark is not None:
            _details.setdefault(mark.args[0], []).append(text)

    return note
