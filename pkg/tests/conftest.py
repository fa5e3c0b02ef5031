import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def cs():
    from optlattice.atomic_data import load_cs133
    return load_cs133()


@pytest.fixture(scope="session")
def clock_state(cs):
    return cs.sublevel(cs.ground.label, 3, 0)
