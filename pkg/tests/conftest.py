import numpy as np
import pytest

from wsc_hardness.knowledge import load_resources
from wsc_hardness.schema import Dataset, SchemaHalf, load_dataset
from wsc_hardness.tables import bundled_path


@pytest.fixture(scope="session")
def resources():
    return load_resources(bundled_path("resources"))


@pytest.fixture(scope="session")
def samples():
    return load_dataset(bundled_path("samples.json")).by_id()


@pytest.fixture(scope="session")
def synthetic():
    return load_dataset(bundled_path("synthetic/halves.json"))


@pytest.fixture
def catch():
    return SchemaHalf("catch", "The cat caught the mouse because it was "
                      "clever.", "Who is clever?", ("The cat", "The mouse"))


@pytest.fixture
def councilmen():
    return SchemaHalf("c2", "The city councilmen refused the demonstrators a "
                      "permit because they advocated violence.",
                      "Who advocated violence?",
                      ("The city councilmen", "The demonstrators"))


def labelled(n, seed=0, prefix="h"):
    """n labelled halves with random hardness."""
    rng = np.random.default_rng(seed)
    return Dataset([SchemaHalf(f"{prefix}{i}", "The cat caught the mouse.",
                               "Who caught the mouse?", ("The cat",
                                                         "The mouse"),
                               hardness=float(rng.random()))
                    for i in range(n)], "test")


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE = {}


def record_criterion(number, title, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
