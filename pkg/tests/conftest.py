import hypothesis
import pytest

from rangenull import ImageTensor
from rangenull.rng import Stream

hypothesis.settings.register_profile("suite", max_examples=60, deadline=None)
hypothesis.settings.load_profile("suite")


@pytest.fixture
def stream():
    return Stream(20260808)


def random_tensor(stream, shape, lo=0.0, hi=1.0):
    return ImageTensor(lo + (hi - lo) * stream.uniform(shape))
