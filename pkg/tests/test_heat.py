import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from besselorbit.criteria import verdict
from besselorbit.heat import (
    HeatMeasureParams,
    heat_measure,
    heat_moment,
    heat_moment_closed_form,
    heat_tail,
    non_bessel_witness,
)
from besselorbit.measure import moment, support_radius, tail_mass, total_mass


@pytest.mark.parametrize("delta", [0.25, 1.0, 4.0, 10.0])
def test_total_mass_is_one(delta):
    assert total_mass(heat_measure(delta)) == pytest.approx(1.0, rel=1e-10)


@pytest.mark.parametrize("delta", [1.0, 4.0])
def test_support_is_spectral_interval(delta):
    comp = heat_measure(delta).components[0]
    assert comp.lower == math.exp(-delta / 4) and comp.upper == 1.0
    assert support_radius(heat_measure(delta)) == 1.0


def test_tail_closed_form_examples():
    assert heat_tail(1.0, 1 - math.exp(-0.25)) == pytest.approx(1.0, rel=1e-14)
    assert heat_tail(4.0, 1 - math.exp(-1)) == pytest.approx(1.0, rel=1e-14)
    ratios = [heat_tail(1.0, 2.0**-m) * 2.0**m for m in (10, 20, 30)]
    assert ratios[0] < ratios[1] < ratios[2]
    with pytest.raises(ValueError):
        heat_tail(1.0, 0.5)
    with pytest.raises(ValueError):
        HeatMeasureParams(-1.0)


@pytest.mark.parametrize("delta", [1.0, 2.5])
def test_quadrature_tail_matches_closed_form(delta):
    mu = heat_measure(delta)
    for m in range(3, 21):
        e = 2.0**-m
        if e > 1 - math.exp(-delta / 4):
            continue
        assert tail_mass(mu, e) == pytest.approx(heat_tail(delta, e), rel=1e-6)


# Fourier-side values from scipy.integrate.quad, frozen
FOURIER_ORACLE = {1: 0.9225620128255849, 10: 0.5462919717851481, 1000: 0.056049912163979296}


@pytest.mark.parametrize("k, value", sorted(FOURIER_ORACLE.items()))
def test_moment_against_frozen_oracle(k, value):
    assert heat_moment(1.0, k) == pytest.approx(value, rel=1e-12)
    assert heat_moment_closed_form(1.0, k) == pytest.approx(value, rel=1e-12)


@pytest.mark.parametrize("k", [1, 2, 5, 20, 100])
def test_spectral_side_moment_matches_fourier_side(k):
    assert moment(heat_measure(1.0), k, 0).real == pytest.approx(heat_moment(1.0, k), rel=1e-8)


def test_moment_examples():
    assert heat_moment(1.0, 0) == 1.0
    k = 10**6
    assert k * heat_moment(1.0, k) / math.sqrt(k) == pytest.approx(math.sqrt(math.pi), rel=1e-3)


def test_moment_positivity_and_decay():
    q = np.array([heat_moment(1.0, k) for k in range(0, 200)])
    assert np.all(q > 0)
    assert np.all(np.diff(q) < 0)
    kq = np.arange(1, 200) * q[1:]
    assert np.all(np.diff(kq) > 0)


def test_witness_report():
    rep = non_bessel_witness(1.0)
    assert rep.divergent and rep.id == "tail_ratio_sup"
    eps = rep.grid["eps"]
    ratios = [v for _, v in rep.values]
    for e, r in zip(eps, ratios):
        # log(1/(1-eps)) ~ eps, so the ratio grows like 2 eps^-1/2
        assert r == pytest.approx(2 / math.sqrt(e), rel=0.2)
    assert max(rep.grid["relative_difference"]) < 1e-6


def test_verdict_is_not_bessel():
    v = verdict(heat_measure(1.0))
    assert (v.status, v.witness) == ("NOT_BESSEL", "tail_ratio_sup")
