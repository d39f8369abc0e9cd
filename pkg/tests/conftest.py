import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mps2qc.targets import GridSpec, heisenberg_ground_state


@pytest.fixture(scope="session")
def heisenberg_4x3():
    """The 12-qubit grid ground state; built once, reused across tests."""
    return heisenberg_ground_state(GridSpec(4, 3), max_chi=64)
