import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile("numeric", deadline=None, max_examples=50,
                                      derandomize=True)
hypothesis.settings.load_profile("numeric")


@pytest.fixture
def rng():
    return np.random.default_rng(20250810)
