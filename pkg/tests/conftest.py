import os

import pytest


def mc_trials(default: int = 100_000) -> int:
    """Trial count for Monte Carlo tests; RPAUTH_TRIALS lowers it for quick runs."""
    return int(os.environ.get("RPAUTH_TRIALS", str(default)))


@pytest.fixture
def trials() -> int:
    return mc_trials()
