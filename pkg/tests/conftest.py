import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ORACLE_FILE = Path(__file__).parent / "oracles" / "oracle_values.json"


@pytest.fixture(scope="session")
def oracles():
    return json.loads(ORACLE_FILE.read_text())


@pytest.fixture(scope="session")
def mp_sym():
    from lagrange_stability.hamiltonian import mass_parameters
    return mass_parameters(np.array([0.98, 0.01, 0.01]))


@pytest.fixture(scope="session")
def mp_asym():
    from lagrange_stability.hamiltonian import mass_parameters
    return mass_parameters(np.array([0.975, 0.02, 0.005]))
