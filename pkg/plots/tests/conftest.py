"""Shared fixtures."""

import pytest

from artifacts import make_rows, write_artifact


@pytest.fixture
def artifact(tmp_path):
    """One well-formed two-seed, four-round CSV."""
    return write_artifact(tmp_path / "run.csv", make_rows(seeds=(0, 1), rounds=4))
