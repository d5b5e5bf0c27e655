import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
_LINES = pytest.StashKey[list]()


def load_fixture(name):
    return json.loads((FIXTURES / name).read_text())


@pytest.fixture(scope="session")
def oracles():
    return load_fixture("oracles.json")


@pytest.fixture(scope="session")
def jagged_regime():
    return load_fixture("jagged_regime.json")


@pytest.fixture(scope="session")
def acceptance_log(pytestconfig):
    """Collects one verdict line per acceptance criterion."""
    return pytestconfig.stash.setdefault(_LINES, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
