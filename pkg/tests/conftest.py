import os
import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from localblock.graph import Graph, parse_edge_list  # noqa: E402

ROOT = Path(__file__).resolve().parent.parent

# criterion lines recorded by test_acceptance.py, printed after the run
ACCEPTANCE_LINES: list[str] = []


def data_dir() -> Path:
    return Path(os.environ.get("LOCALBLOCK_DATA", ROOT / "data"))


def random_graph(rng: random.Random, n: int, p: float) -> tuple[Graph, list[tuple[int, int]]]:
    edges = [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < p]
    return Graph.from_edges(n, edges), edges


@pytest.fixture
def triangle():
    return parse_edge_list("a b\nb c\nc a")


@pytest.fixture
def path3():
    """a - b - c with ids a=0, b=1, c=2."""
    return parse_edge_list("a b\nb c")


@pytest.fixture
def star4():
    """Centre 0 with leaves 1..4."""
    return Graph.from_edges(5, [(0, i) for i in range(1, 5)])


@pytest.fixture
def k4():
    return Graph.from_edges(4, [(a, b) for a in range(4) for b in range(a + 1, 4)])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
