from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

PUBLISHED_MAPE = {
    "fnTBL": 0.32, "MaxEnt": 0.15, "MBT": 0.28, "Morfette": 0.09,
    "mxpost": 0.35, "Stanford": 0.02, "SVMTool": 0.12, "TnT": 0.12,
}


@pytest.fixture
def tagger_table_config() -> Path:
    return DATA / "tagger_table" / "experiment.ini"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, summary): acceptance criterion checked by the test")
    config._criteria = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None and (report.when == "call" or report.outcome != "passed"):
        item.config._criteria.append((marker.args[0], marker.args[1], report.outcome))


def pytest_terminal_summary(terminalreporter, config):
    if not config._criteria:
        return
    verdicts: dict[str, tuple[str, bool]] = {}
    for cid, summary, outcome in config._criteria:
        ok = verdicts.get(cid, (summary, True))[1] and outcome == "passed"
        verdicts[cid] = (summary, ok)
    terminalreporter.section("acceptance criteria")
    for cid in sorted(verdicts):
        summary, ok = verdicts[cid]
        terminalreporter.write_line(f"{cid} {'PASS' if ok else 'FAIL'}  {summary}")
