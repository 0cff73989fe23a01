import math

import numpy as np
import pytest

from besselorbit.measure import AtomicComponent, SpectralMeasureSpec, loads_spec


def spec(text: str) -> SpectralMeasureSpec:
    return loads_spec(text)


def atoms(pairs) -> SpectralMeasureSpec:
    locs, ms = zip(*pairs)
    return SpectralMeasureSpec((AtomicComponent(tuple(locs), tuple(ms)),))


@pytest.fixture
def arc():
    return spec('[{"kind":"circle","density":"1"}]')


@pytest.fixture
def lebesgue():
    return spec('[{"kind":"interval","lower":-1,"upper":1,"density":"1"}]')


@pytest.fixture
def cos_density():
    return spec('[{"kind":"circle","density":"1 + 0.5*cos(theta)"}]')


@pytest.fixture
def discrete_example():
    n = range(1, 61)
    return atoms([(1 - 1 / k, 2.0 ** (-2 * k)) for k in n])


@pytest.fixture
def non_carleson():
    n = range(1, 31)
    return atoms([(1 - 2.0**-k, k * 2.0**-k) for k in n])


@pytest.fixture
def mixed():
    return spec(
        '[{"kind":"atoms","atoms":[{"re":0.3,"im":0.2,"mass":0.5},{"re":-0.5,"im":0.6,"mass":0.3}]},'
        '{"kind":"disk","density":"1+0.3*cos(theta)","r_max":0.9}]'
    )


# exact partial sums, frozen from math.fsum
DISCRETE_BOUND = 0.3742188235973124  # sum_{n<=60} 4^-n n^2/(2n-1)
NON_CARLESON_MASS = 1.9999999701976776  # sum_{n<=30} n 2^-n
