import numpy as np
import pytest

from tropmoment.corpus import random_lengths, small_multigraphs
from tropmoment.graph import WeightedGraph


def banana(lengths):
    return WeightedGraph(("u", "v"), tuple(("u", "v", float(x)) for x in lengths))


def cycle(lengths):
    n = len(lengths)
    vs = tuple(f"c{i}" for i in range(n))
    return WeightedGraph(vs, tuple((vs[i], vs[(i + 1) % n], float(x)) for i, x in enumerate(lengths)))


@pytest.fixture(scope="session")
def corpus():
    return small_multigraphs(5, 8)


@pytest.fixture(scope="session")
def corpus_random(corpus):
    rng = np.random.default_rng(20240611)
    return [random_lengths(g, rng) for g in corpus]


@pytest.fixture(scope="session")
def triangle():
    return WeightedGraph.from_edges([("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)])


# one line per acceptance criterion, printed after the run
ACCEPTANCE: list[str] = []


def record(label: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split(" C", 1)[1].split(" ", 1)[0])):
            terminalreporter.write_line(line)
