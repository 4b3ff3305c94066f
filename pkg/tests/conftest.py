import numpy as np
import pytest

from yeastmc import receiver as rx
from yeastmc import transmitter as tx


@pytest.fixture(scope="session")
def rx_delta():
    p = rx.load_rx_params(preset="bar1_delta")
    return p, rx.basal_state(p)


@pytest.fixture(scope="session")
def rx_plus():
    p = rx.load_rx_params(preset="bar1_plus")
    return p, rx.basal_state(p)


@pytest.fixture(scope="session")
def tx_params():
    return tx.load_tx_params()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
