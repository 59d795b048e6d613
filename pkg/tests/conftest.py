import numpy as np
import pytest

from pctsim import SclDecoder, construct_code


@pytest.fixture(scope="session")
def code128():
    return construct_code(128, 38)


@pytest.fixture(scope="session")
def toy():
    return construct_code(8, 4)


@pytest.fixture(scope="session")
def toy_decoder(toy):
    return SclDecoder(toy, 16)


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)
