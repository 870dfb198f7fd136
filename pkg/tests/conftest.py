from __future__ import annotations

from pathlib import Path

import pytest

from causal_atlas.builder import BuildConfig, build_atlas
from causal_atlas.ingest import load_runs, scan_runs_root

GOLDEN_RUNS = Path(__file__).parent / "fixtures" / "golden_runs"

_criteria: dict[int, tuple[str, str]] = {}
_SEVERITY = ["PASS", "SKIP", "FAIL"]


def build_golden(root: Path = GOLDEN_RUNS, **cfg):
    return build_atlas(load_runs(scan_runs_root(root)), BuildConfig(**cfg))


@pytest.fixture(scope="session")
def golden_root() -> Path:
    return GOLDEN_RUNS


@pytest.fixture(scope="session")
def golden_atlas():
    return build_golden()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    if report.failed:
        status = "FAIL"
    elif report.skipped:
        status = "SKIP"
    elif report.when == "call":
        status = "PASS"
    else:
        return
    prev = _criteria.get(n, (title, "PASS"))[1]
    _criteria[n] = (title, max(prev, status, key=_SEVERITY.index))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, status = _criteria[n]
        terminalreporter.write_line(f"criterion {n:>2} {status}: {title}")
