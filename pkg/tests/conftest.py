import hypothesis
import numpy as np
import pytest

from mgami.constellation import make_psk, make_qam

np.seterr(all="ignore")

hypothesis.settings.register_profile("default", max_examples=25, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.load_profile("default")


@pytest.fixture(scope="session")
def bpsk():
    return make_psk(2)


@pytest.fixture(scope="session")
def qam4():
    return make_qam(4)


@pytest.fixture(scope="session")
def qam16():
    return make_qam(16)
