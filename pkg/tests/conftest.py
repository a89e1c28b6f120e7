import numpy as np
import pytest

from relaycode.trellis import parse_generator_spec


@pytest.fixture(scope="session")
def specs():
    return {
        "rsc12": parse_generator_spec("1,5/7"),
        "ff12": parse_generator_spec("5,7"),
        "rate1_57": parse_generator_spec("5/7"),
        "rate1_37": parse_generator_spec("3/7"),
        "ff13": parse_generator_spec("5,7,7"),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
