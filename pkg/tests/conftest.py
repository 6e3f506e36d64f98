import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wavelength import data
from wavelength.agents.config import AgentConfig
from wavelength.agents.mock import (
    GaussianCurve,
    MockAgent,
    TabularLexicon,
    gaussian_comprehension_suite,
)


@pytest.fixture
def problems_small():
    return data.load_placeholder_problems()[:6]


@pytest.fixture
def gaussian_setup(problems_small):
    """(problems, mock agent, clue map) for a sigma-5 on-target lexicon."""
    lexicon, clue_map = gaussian_comprehension_suite(problems_small)
    agent = MockAgent(lexicon, AgentConfig(mode="direct", estimator="logprob-scoring"))
    return problems_small, agent, clue_map


def write_jsonl(path: Path, records) -> Path:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record) + "\n")
    return path


@pytest.fixture
def problems_file(tmp_path, problems_small):
    path = tmp_path / "problems.jsonl"
    data.save_problems(problems_small, path)
    return path


@pytest.fixture
def tiny_lexicon():
    return TabularLexicon({
        "low": GaussianCurve(10.0, 6.0),
        "middle": GaussianCurve(50.0, 6.0),
        "high": GaussianCurve(90.0, 6.0),
    })
