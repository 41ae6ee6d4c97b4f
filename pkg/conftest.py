import numpy as np
import pytest
from hypothesis import settings
from loguru import logger

from src.core.smallmat import DensityMatrix, basis_ket

settings.register_profile("entangler", max_examples=50, deadline=None)
settings.load_profile("entangler")


@pytest.fixture(autouse=True)
def quiet_logs():
    logger.remove()
    yield


@pytest.fixture
def bell_state():
    ket = (basis_ket("00") + basis_ket("11")) / np.sqrt(2.0)
    return DensityMatrix.from_ket(ket)


@pytest.fixture
def isolated_output(tmp_path, monkeypatch):
    """Run in a scratch directory with output and logs kept there"""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("ENTANGLER_OUTPUT_DIR", str(tmp_path / "output"))
    return tmp_path
