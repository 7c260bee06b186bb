import pytest

from por.certmine import MinerKeypair
from por.reputation import ReputationParams

# Bitcoin-style calibration: bonus halves every 52560 blocks, network bonus 0.3.
BITCOIN_CHI = 1.3187731745813266e-05


@pytest.fixture(scope="session")
def bitcoin_params() -> ReputationParams:
    return ReputationParams.from_target(0.3, BITCOIN_CHI)


@pytest.fixture(scope="session")
def fast_params() -> ReputationParams:
    """Fast-decaying sequence for desk-scale ledgers (half-life ~7 blocks)."""
    return ReputationParams.from_target(0.3, 0.1)


@pytest.fixture(scope="session")
def keypair_a() -> MinerKeypair:
    return MinerKeypair.from_seed_int(1)


@pytest.fixture(scope="session")
def keypair_b() -> MinerKeypair:
    return MinerKeypair.from_seed_int(2)
