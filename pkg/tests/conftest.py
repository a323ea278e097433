import numpy as np
import pytest
from hypothesis import settings

from dyadic_mhd.shell_model import ShellState

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def geometric_state(n, amp_a=1.0, amp_b=1.0, ratio=0.5, t=0.0):
    j = np.arange(1, n + 1, dtype=float)
    return ShellState(t, amp_a * ratio ** j, amp_b * ratio ** j)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
