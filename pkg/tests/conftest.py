import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from icfmdp import ObservedPath, build_toy_mdp


@pytest.fixture
def toy():
    return build_toy_mdp()


@pytest.fixture
def toy_obs():
    """The canonical one-step observation on the toy MDP: state 0 -> state 1."""
    return (0, 0, 1)


@pytest.fixture
def toy_path():
    return ObservedPath((0, 1), (0,))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
