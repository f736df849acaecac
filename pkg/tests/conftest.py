import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make tests/oracles.py importable

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


def read_tsv(name: str) -> list[list[str]]:
    path = FIXTURES / name
    rows = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line:
            rows.append(line.split("\t"))
    return rows


def load_corpus(name: str) -> list[tuple[str, str]]:
    return [(row[0], row[1]) for row in read_tsv(name)]
