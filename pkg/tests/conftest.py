from __future__ import annotations

from pathlib import Path

import pytest

from specloop import MockVerifier, ReplayOracle, load_dataset

import toyworld

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def annotated_dir() -> Path:
    return FIXTURES / "annotated"


@pytest.fixture(scope="session")
def toy_corpus():
    return load_dataset(FIXTURES / "toy_corpus")


@pytest.fixture(scope="session")
def persona_dir(tmp_path_factory, toy_corpus) -> Path:
    root = tmp_path_factory.mktemp("persona-default")
    return toyworld.build_persona(root, toy_corpus)


@pytest.fixture(scope="session")
def replay_oracle(persona_dir) -> ReplayOracle:
    return ReplayOracle(persona_dir)


@pytest.fixture()
def rule_verifier() -> MockVerifier:
    return MockVerifier(always_failing=toyworld.ALWAYS_FAILING)
