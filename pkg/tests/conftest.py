import os
from pathlib import Path

import numpy as np
import pytest

from xtreeplan.dataset_io import ProjectDataset, write_csv
from xtreeplan.synthetic import make_project

PROMISE_PROJECTS = ("ant", "ivy", "jedit", "poi")

_criteria: list[tuple[int, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        _criteria.append((marker.args[0], status, marker.args[1]))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, text in sorted(_criteria):
        terminalreporter.write_line(f"criterion {number}: {status}  {text}")


def promise_dir() -> Path | None:
    """Directory holding ant.csv, ivy.csv, jedit.csv, poi.csv, if available."""
    candidates = [os.environ.get("XTREE_PROMISE_DIR"), Path(__file__).parent / "data" / "promise"]
    for c in candidates:
        if c and all((Path(c) / f"{p}.csv").is_file() for p in PROMISE_PROJECTS):
            return Path(c)
    return None


@pytest.fixture(scope="session")
def promise():
    path = promise_dir()
    if path is None:
        pytest.fail(
            "PROMISE CK datasets not found: put ant.csv, ivy.csv, jedit.csv and poi.csv in "
            "tests/data/promise/ or point XTREE_PROMISE_DIR at them"
        )
    return path


@pytest.fixture
def write_table(tmp_path):
    """Write a CSV from a header and rows; returns the path."""

    def write(name, header, rows):
        path = tmp_path / name
        lines = [",".join(header)] + [",".join(str(c) for c in row) for row in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return write


@pytest.fixture
def loc_data():
    """Six instances on one feature, cleanly separable at 6.5."""
    return ProjectDataset.from_arrays(
        "toy", ["loc"], np.array([[1.0], [2.0], [3.0], [10.0], [11.0], [12.0]]), [0, 0, 0, 1, 2, 1]
    )


@pytest.fixture(scope="session")
def project():
    return make_project("alpha", 360, seed=7, n_features=8)


@pytest.fixture(scope="session")
def family_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("family")
    for k, name in enumerate(["ant", "ivy", "jedit", "poi"]):
        write_csv(make_project(name, 220, seed=100 + k, n_features=6), root / f"{name}.csv")
    return root
