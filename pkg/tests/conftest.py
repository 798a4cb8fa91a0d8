import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from beamspace import generate_random_scenario, load_scenario, reference_config_text  # noqa: E402

# filled by test_acceptance, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def table2():
    """Reference scenario without paths."""
    return load_scenario(reference_config_text())


@pytest.fixture(scope="session")
def fig4_scenario(table2):
    return generate_random_scenario(table2, 3, 3, table2.rng_seed)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
