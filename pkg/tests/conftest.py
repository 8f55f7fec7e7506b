import numpy as np
import pytest

from altbd import Rates, transient_distribution


@pytest.fixture
def rates_12():
    return Rates(1.0, 2.0)


@pytest.fixture
def rates_21():
    return Rates(2.0, 1.0)


@pytest.fixture
def rates_22():
    return Rates(2.0, 2.0)


def oracle_moments(kind, rates, k, t, eps=1e-12):
    """Mean and variance from the uniformization oracle."""
    states, probs = transient_distribution(kind, rates, k, t, eps)
    states = states.astype(float)
    m1 = float(probs @ states)
    m2 = float(probs @ states**2)
    return m1, m2 - m1 * m1


def oracle_prob(kind, rates, k, n, t, eps=1e-12):
    states, probs = transient_distribution(kind, rates, k, t, eps)
    idx = np.searchsorted(states, n)
    if idx >= states.size or states[idx] != n:
        return 0.0
    return float(probs[idx])
