import os
from pathlib import Path

import numpy as np
import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]
SUBSET_DIR = REPO_ROOT / "data" / "mnist-subset"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def subset_dir() -> Path:
    if not SUBSET_DIR.exists():
        pytest.skip(f"bundled digit subset missing at {SUBSET_DIR}")
    return SUBSET_DIR


def official_mnist_dir() -> Path | None:
    """The official 60k/10k dataset directory, if one is configured.

    Recognized when HT_DATA_DIR points at IDX files whose train split holds
    60000 items (the bundled subset does not qualify).
    """
    env = os.environ.get("HT_DATA_DIR")
    if not env:
        return None
    base = Path(env)
    try:
        from htnn.data import read_idx_labels, resolve_split

        _, labels = resolve_split(base, "train")
        if read_idx_labels(labels).shape[0] == 60000:
            return base
    except (FileNotFoundError, ValueError):
        return None
    return None
