import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from slicerec.trellis import DEFAULT_SPEC, build_transition_table


@pytest.fixture(scope="session")
def table():
    return build_transition_table(DEFAULT_SPEC)
