import pytest

from histoblend import ToyBackend


@pytest.fixture(scope="session")
def toy():
    return ToyBackend()


@pytest.fixture(scope="session")
def toy_embeddings(toy):
    return toy.embeddings()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    rows = []
    for status in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            if getattr(rep, "when", "call") != "call" and status != "error":
                continue
            rows.append((nodeid.split("::")[-1], "PASS" if status == "passed" else status.upper()))
    if rows:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, status in sorted(set(rows)):
            terminalreporter.write_line(f"{name}: {status}")
