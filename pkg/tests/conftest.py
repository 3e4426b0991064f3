import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from matter.dataset import release_from_columns  # noqa: E402
from matter.ranking import Ranking  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


def random_release(rng: random.Random, max_k: int = 25, metrics: int = 0, labeled: bool = True,
                   max_sloc: int = 200):
    k = rng.randint(1, max_k)
    ids = [f"m{i:02d}" for i in range(k)]
    rng.shuffle(ids)
    slocs = [rng.randint(1, max_sloc) for _ in range(k)]
    labels = [rng.random() < rng.random() for _ in range(k)] if labeled else None
    cols = {f"x{j}": [rng.gauss(0, 1) for _ in range(k)] for j in range(metrics)}
    return release_from_columns(ids, slocs, labels, cols)


def random_ranking(rng: random.Random, dataset):
    order = dataset.ids
    rng.shuffle(order)
    return Ranking.from_order(dataset.release_id, order, "random")


@pytest.fixture
def acceptance():
    def record(number: int, passed: bool, detail: str):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
