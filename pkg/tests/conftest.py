import math

import pytest

from bellcv import fock_oracle


@pytest.fixture(scope="session")
def fig3b_state():
    """Conditioned state at r = 0.6, R = 0.9891, eta = 1, where B_CHSH is flat in eta."""
    return fock_oracle.conditioned_state(0.6, 0.9891, 1.0)


@pytest.fixture(scope="session")
def negativity_state():
    return fock_oracle.conditioned_state(0.6, 0.99, 1.0)[0]


@pytest.fixture(scope="session")
def low_eta_state():
    return fock_oracle.conditioned_state(0.3, 0.95, 0.3)


@pytest.fixture
def theta_of():
    return lambda refl: math.asin(math.sqrt(refl))
