import pytest

import radarvitals as rv


@pytest.fixture(scope="session")
def walabot():
    return rv.walabot_config(f_st=10.0)


@pytest.fixture(scope="session")
def derived(walabot):
    return rv.derive_params(walabot)
