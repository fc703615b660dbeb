import sys
from unittest.mock import MagicMock


# Create mock cache decorator that just returns the function unchanged
def mock_cached(*args, **kwargs):
    def decorator(func):
        return func

    return decorator


# Patch the module before the endpoints import it
sys.modules["aiocache"] = MagicMock()
sys.modules["aiocache"].cached = mock_cached

# Now we can safely import pytest and other modules
import numpy as np
import pytest
from fastapi.testclient import TestClient
from typer.testing import CliRunner

from app.models.models import PartialRanking, RankingDataset


def pytest_sessionfinish(session, exitstatus):
    """Remove the mocked cache module at the end of the session."""
    sys.modules.pop("aiocache", None)


@pytest.fixture
def client():
    """Create a test client."""
    from app.main import app

    return TestClient(app)


@pytest.fixture
def runner():
    """Create a CLI runner."""
    return CliRunner()


@pytest.fixture
def rng():
    """A fixed-seed generator, fresh for every test."""
    return np.random.default_rng(20240917)


@pytest.fixture
def small_dataset():
    """Four items, five rankings, connected, with every item winning and losing at least once."""
    rankings = [(0, 1, 2), (2, 3, 0), (1, 3), (3, 0, 1, 2), (2, 1)]
    return RankingDataset(
        n=4,
        rankings=tuple(
            PartialRanking(user=user, items=items) for user, items in enumerate(rankings)
        ),
    )


@pytest.fixture
def rankings_file(tmp_path, small_dataset):
    """The small dataset written as a rankings file."""
    from app.utils.io import save_rankings

    return save_rankings(small_dataset, tmp_path / "rankings.jsonl")
