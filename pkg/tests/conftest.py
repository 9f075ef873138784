from pathlib import Path

import pytest

from clozeval import (
    EmbeddingModel,
    load_embeddings,
    load_judge_sessions,
    parse_responses,
    parse_test_file,
)

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"

MODEL_NAMES = ("model_a", "model_b", "model_c")


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def fixture_test():
    return parse_test_file(FIXTURES / "test.json")


@pytest.fixture(scope="session")
def fixture_sheets(fixture_test):
    return parse_responses(FIXTURES / "responses.csv", fixture_test)


@pytest.fixture(scope="session")
def fixture_sessions():
    return load_judge_sessions(FIXTURES / "judges")


@pytest.fixture(scope="session")
def fixture_models():
    return {
        name: load_embeddings(FIXTURES / "models" / f"{name}.txt", name=name)
        for name in MODEL_NAMES
    }


@pytest.fixture()
def toy_model() -> EmbeddingModel:
    """Three words in 2-D: a=(1,0), b=(0,1), c normalizes to (1/sqrt2, 1/sqrt2)."""
    return EmbeddingModel.from_vectors("toy", {"a": (1, 0), "b": (0, 1), "c": (1, 1)})
