import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sp_integrate

from besselorbit.gram import build_section
from besselorbit.measure import (
    MeasureError,
    SingularIntegrandError,
    SpecError,
    SpectralMeasureSpec,
    ball_mass,
    ball_masses,
    dump_spec,
    integrate_measure,
    loads_spec,
    moment,
    poisson_integral,
    resolvent_norm_sq,
    stieltjes_inversion,
    support_radius,
    tail_mass,
    total_mass,
)
from conftest import atoms, spec
from strategies import mixed_measures


# --- examples ---------------------------------------------------------------


def test_total_mass_examples(arc, lebesgue):
    assert total_mass(atoms([(0.5, 1.0)])) == 1.0
    assert total_mass(arc) == pytest.approx(1.0, abs=1e-14)
    assert total_mass(lebesgue) == pytest.approx(2.0, abs=1e-14)


@pytest.mark.parametrize("k, j", [(0, 0), (3, 3), (3, 1), (0, 5), (7, 2)])
def test_moment_examples(arc, lebesgue, k, j):
    assert moment(arc, k, j) == pytest.approx(1.0 if k == j else 0.0, abs=1e-13)
    assert moment(atoms([(0.5, 1.0)]), k, j) == pytest.approx(0.5 ** (k + j), rel=1e-15)
    want = 2 / (k + j + 1) if (k + j) % 2 == 0 else 0.0
    assert moment(lebesgue, k, j) == pytest.approx(want, abs=1e-13)


def test_moment_rejects_negative_index(arc):
    with pytest.raises(MeasureError):
        moment(arc, -1, 0)


def test_tail_examples(arc, lebesgue):
    for e in (0.5, 0.1, 2.0**-20):
        assert tail_mass(arc, e) == pytest.approx(1.0, abs=1e-13)
        assert tail_mass(lebesgue, e) == pytest.approx(2 * e, rel=1e-12)
    with pytest.raises(MeasureError):
        tail_mass(arc, 0.0)


def test_ball_mass_examples(arc):
    for r in (1e-3, 0.1, 1.0, 3.0):
        assert ball_mass(atoms([(1.0, 0.7)]), 1.0, r) == 0.7
    # chord-length oracle for the normalised arc
    for r in (2.0**-20, 0.01, 0.1, 0.5):
        assert ball_mass(arc, 1j, r) == pytest.approx(2 * math.asin(r / 2) / math.pi, rel=1e-10)
    inner = spec('[{"kind":"disk","density":"1","r_max":0.5}]')
    assert ball_mass(inner, -1.0, 0.49) == 0.0
    with pytest.raises(MeasureError):
        ball_mass(arc, 0.5, 0.1)


def test_ball_mass_of_disk_against_scipy():
    mu = spec('[{"kind":"disk","density":"1 + r*cos(theta)","r_max":1.0}]')
    r = 0.3
    # oracle in Cartesian coordinates: density 1 + x over {x^2+y^2 <= 1, |z-1| < r}
    def half_width(x):
        return min(math.sqrt(max(r * r - (x - 1) ** 2, 0.0)), math.sqrt(max(1 - x * x, 0.0)))

    ref, _ = sp_integrate.dblquad(lambda y, x: 1 + x, 1 - r, 1.0,
                                  lambda x: -half_width(x), half_width, epsabs=1e-13, epsrel=1e-12)
    assert ball_mass(mu, 1.0, r) == pytest.approx(ref, rel=1e-6)


def test_support_radius_examples(arc):
    assert support_radius(atoms([(1.5, 1.0)])) == 1.5
    assert support_radius(arc) == 1.0
    assert support_radius(spec('[{"kind":"interval","lower":-0.9,"upper":0.3,"density":"1"}]')) == 0.9


def test_resolvent_examples(arc):
    assert resolvent_norm_sq(atoms([(0.0, 1.0)]), 2.0) == 0.25
    for lam in (0.0, 0.5j, -0.9, (1 - 2.0**-20) * np.exp(0.7j)):
        assert resolvent_norm_sq(arc, lam) == pytest.approx(1 / (1 - abs(lam) ** 2), rel=1e-9)
    with pytest.raises(SingularIntegrandError):
        resolvent_norm_sq(arc, 1j)
    with pytest.raises(SingularIntegrandError):
        resolvent_norm_sq(spec('[{"kind":"interval","lower":-1,"upper":1,"density":"1"}]'), 0.5)


def test_poisson_examples(arc):
    for w in (0.0, 0.3 + 0.4j, 0.999 * np.exp(2j)):
        assert poisson_integral(arc, w) == pytest.approx(1.0, rel=1e-10)
    assert poisson_integral(atoms([(1.0, 1.0)]), 0.0) == 1.0


@pytest.mark.parametrize("w", [0.2, 0.5 - 0.6j, 0.9j])
def test_poisson_reflection(cos_density, w):
    a = poisson_integral(cos_density, w)
    b = poisson_integral(cos_density, 1 / np.conj(w))
    assert b == pytest.approx(-a, rel=1e-10)


def test_stieltjes_examples(arc):
    rs = [0.5, 0.9, 0.999]
    assert stieltjes_inversion(arc, 0.2, 1.7, rs) == pytest.approx([1.5 / (2 * math.pi)] * 3, rel=1e-10)
    one = atoms([(1.0, 1.0)])
    rs = [1 - 2.0**-m for m in range(2, 17)]
    inside = stieltjes_inversion(one, -1.0, 1.0, rs)
    # oracle: the Poisson kernel integrated over the arc in closed form
    exact = [(math.atan((1 + r) / (1 - r) * math.tan(0.5)) * 2) / math.pi for r in rs]
    assert inside == pytest.approx(exact, rel=1e-9)
    edge = stieltjes_inversion(one, 0.0, 1.0, rs)
    assert abs(edge[-1] - 0.5) < 2.0**-12


def test_stieltjes_rejects_bad_input(arc):
    with pytest.raises(MeasureError):
        stieltjes_inversion(arc, 1.0, 0.5, [0.5])
    with pytest.raises(MeasureError):
        stieltjes_inversion(arc, 0.0, 1.0, [0.9, 0.5])


# --- JSON -------------------------------------------------------------------


def test_json_round_trip(mixed):
    again = loads_spec(dump_spec(mixed))
    assert total_mass(again) == total_mass(mixed)


@pytest.mark.parametrize(
    "doc, index",
    [
        ('[{"kind":"circle","density":"1"}, {"kind":"blob"}]', 1),
        ('[{"kind":"circle","density":"log(theta"}]', 0),
        ('[{"kind":"atoms","atoms":[{"re":0,"mass":-1}]}]', 0),
        ('[{"kind":"atoms","atoms":[{"re":0,"mass":1},{"re":0,"mass":2}]}]', 0),
        ('[{"kind":"circle","density":"1"},{"kind":"interval","lower":0,"upper":1}]', 1),
        ('[{"kind":"disk","density":"1","r_max":1.5}]', 0),
        ('[{"kind":"circle","density":"t"}]', 0),
        ('[{"kind":"circle","density":"1","extra":3}]', 0),
    ],
)
def test_spec_errors_cite_component(doc, index):
    with pytest.raises(SpecError) as info:
        loads_spec(doc)
    assert info.value.index == index
    assert f"component {index}" in str(info.value)


@pytest.mark.parametrize("doc", ["{}", "[]", "not json"])
def test_spec_errors_top_level(doc):
    with pytest.raises(SpecError):
        loads_spec(doc)


def test_negative_density_is_rejected_not_clipped():
    mu = spec('[{"kind":"circle","density":"cos(theta)"}]')
    with pytest.raises(MeasureError):
        total_mass(mu)


# --- invariants -------------------------------------------------------------

settings_small = settings(max_examples=15, deadline=None)


@settings_small
@given(mixed_measures(), st.integers(0, 32), st.integers(0, 32))
def test_hermitian_symmetry(mu, k, j):
    a, b = moment(mu, k, j), moment(mu, j, k)
    assert abs(a - np.conj(b)) <= 1e-10 * max(1.0, abs(a))


@settings_small
@given(mixed_measures(), st.integers(1, 32), st.integers(0, 2**31 - 1))
def test_moment_forms_are_psd(mu, n, seed):
    G = build_section(mu, n).entries()
    c = np.random.default_rng(seed).standard_normal(n) + 1j * np.random.default_rng(seed + 1).standard_normal(n)
    q = np.real(np.conj(c) @ G @ c)
    assert q >= -1e-10 * np.vdot(c, c).real * total_mass(mu)


@settings_small
@given(mixed_measures(), st.lists(st.floats(1e-6, 0.99), min_size=2, max_size=5))
def test_tail_mass_monotone(mu, eps):
    eps = sorted(eps)
    vals = [tail_mass(mu, e) for e in eps]
    assert all(b >= a - 1e-12 * max(1.0, a) for a, b in zip(vals, vals[1:]))


@settings_small
@given(mixed_measures(), st.floats(0, 2 * math.pi), st.lists(st.floats(1e-5, 2.5), min_size=2, max_size=5))
def test_ball_mass_monotone(mu, angle, radii):
    radii = sorted(radii)
    vals = [ball_masses(mu, [angle], r)[0] for r in radii]
    assert all(b >= a - 1e-10 * max(1.0, a) for a, b in zip(vals, vals[1:]))


@settings_small
@given(mixed_measures())
def test_additivity_over_components(mu):
    parts = [SpectralMeasureSpec((c,)) for c in mu]
    lam = 1.3 * np.exp(0.4j)
    assert total_mass(mu) == pytest.approx(sum(total_mass(p) for p in parts), rel=1e-12)
    assert moment(mu, 3, 1) == pytest.approx(sum(moment(p, 3, 1) for p in parts), rel=1e-12, abs=1e-14)
    assert tail_mass(mu, 0.2) == pytest.approx(sum(tail_mass(p, 0.2) for p in parts), rel=1e-12, abs=1e-14)
    assert resolvent_norm_sq(mu, lam) == pytest.approx(sum(resolvent_norm_sq(p, lam) for p in parts), rel=1e-12)


@settings_small
@given(mixed_measures(), st.integers(1, 12), st.integers(0, 2**31 - 1))
def test_synthesis_operator_identity(mu, n, seed):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    direct = integrate_measure(mu, lambda z: (np.abs(np.polynomial.polynomial.polyval(z, c)) ** 2)[None, :])[0]
    G = build_section(mu, n).entries()
    assert np.real(np.conj(c) @ G @ c) == pytest.approx(np.real(direct), rel=1e-8, abs=1e-10)


@settings_small
@given(mixed_measures(kinds=("atoms", "circle")), st.floats(0.0, 0.999), st.floats(0, 2 * math.pi))
def test_poisson_resolvent_link(mu, rho, angle):
    circle = mu.circle_part()
    if not circle.components:
        return
    w = rho * np.exp(1j * angle)
    p = poisson_integral(circle, w)
    r = (1 - abs(w) ** 2) * resolvent_norm_sq(circle, w)
    assert p == pytest.approx(r, rel=1e-9)
