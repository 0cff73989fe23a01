import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from besselorbit.gram import (
    GramError,
    GramSection,
    NormConvergenceError,
    bessel_bound_profile,
    build_section,
    operator_norm,
    structured_matvec,
)
from besselorbit.measure import moment
from conftest import atoms, spec
from strategies import mixed_measures


def test_arc_section_is_identity(arc):
    s = build_section(arc, 8)
    assert s.structure == "toeplitz"
    assert np.max(np.abs(s.entries() - np.eye(8))) < 1e-14


def test_unit_atom_section_is_all_ones():
    s = build_section(atoms([(1.0, 1.0)]), 8)
    assert np.array_equal(s.entries(), np.ones((8, 8)))


def test_lebesgue_section_is_hankel(lebesgue):
    s = build_section(lebesgue, 4)
    assert s.structure == "hankel"
    assert s.coefficients == pytest.approx([2, 0, 2 / 3, 0, 2 / 5, 0, 2 / 7], abs=1e-14)


def test_mixed_section_is_dense(mixed):
    assert build_section(mixed, 4).structure == "dense"


def test_bad_size():
    with pytest.raises(GramError):
        build_section(atoms([(0.5, 1.0)]), 0)


def test_matvec_identity(arc):
    v = np.arange(5.0) + 1j
    assert np.allclose(structured_matvec(build_section(arc, 5), v), v, atol=1e-14)


def test_matvec_dimension_mismatch(arc):
    with pytest.raises(GramError):
        structured_matvec(build_section(arc, 5), np.ones(4))


def test_random_toeplitz_matvec_against_dense():
    rng = np.random.default_rng(7)
    n = 1024
    c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    c[0] = abs(c[0])
    s = GramSection(n, "toeplitz", c)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    dense = s.entries() @ v
    assert np.linalg.norm(s.matvec(v) - dense) <= 1e-10 * np.linalg.norm(dense)


def test_lebesgue_hankel_matvec_against_dense(lebesgue):
    s = build_section(lebesgue, 512)
    rng = np.random.default_rng(3)
    v = rng.standard_normal(512) + 1j * rng.standard_normal(512)
    dense = s.entries() @ v
    assert np.linalg.norm(s.matvec(v) - dense) <= 1e-10 * np.linalg.norm(dense)


@pytest.mark.parametrize("n", [10, 100, 1000])
def test_norm_examples(n):
    assert operator_norm(GramSection(n, "toeplitz", np.eye(1, n)[0].astype(complex))) == pytest.approx(1.0, abs=1e-12)
    ones = GramSection(n, "toeplitz", np.ones(n, dtype=complex))
    assert operator_norm(ones) == pytest.approx(n, rel=1e-10)


def test_rank_one_norm():
    rng = np.random.default_rng(1)
    v = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    G = np.outer(v, v.conj())
    assert operator_norm(GramSection(50, "dense", dense=G)) == pytest.approx(np.vdot(v, v).real, rel=1e-12)


def test_large_norm_matches_dense_eigensolver(cos_density):
    s = build_section(cos_density, 300)
    assert operator_norm(s) == pytest.approx(np.linalg.eigvalsh(s.entries())[-1], rel=1e-10)


def test_nonconvergence_carries_last_estimate(cos_density):
    s = build_section(cos_density, 2000)
    with pytest.raises(NormConvergenceError) as info:
        operator_norm(s, tol=1e-15, max_iter=1)
    assert info.value.last_estimate > 0


def test_profile_examples(arc, lebesgue):
    assert [v for _, v in bessel_bound_profile(arc, [8, 64, 256])] == pytest.approx([1, 1, 1], abs=1e-12)
    prof = bessel_bound_profile(atoms([(1.0, 1.0)]), [4, 16, 100])
    assert [v for _, v in prof] == pytest.approx([4, 16, 100], rel=1e-10)
    prof = bessel_bound_profile(lebesgue, [64, 128, 256, 512])
    norms = [v for _, v in prof]
    assert all(b >= a for a, b in zip(norms, norms[1:]))
    assert max(norms) <= 2 * math.pi


def test_profile_rejects_unsorted(arc):
    with pytest.raises(GramError):
        bessel_bound_profile(arc, [16, 8])


def test_structure_matches_dense_entries(cos_density, lebesgue):
    s = build_section(cos_density, 6).entries()
    for j in range(6):
        for k in range(6):
            assert abs(s[j, k] - moment(cos_density, k, j)) < 1e-10
    h = build_section(lebesgue, 6).entries()
    for j in range(6):
        for k in range(6):
            assert abs(h[j, k] - moment(lebesgue, k, j)) < 1e-10


def test_toeplitz_symbol_spectrum(cos_density):
    norm = operator_norm(build_section(cos_density, 4096))
    assert 1.49 <= norm <= 1.5 + 1e-6


@settings(max_examples=15, deadline=None)
@given(mixed_measures(), st.integers(1, 40))
def test_section_hermitian_psd(mu, n):
    G = build_section(mu, n).entries()
    assert np.max(np.abs(G - G.conj().T)) <= 1e-12 * max(1.0, np.max(np.abs(G)))
    w = np.linalg.eigvalsh(G)
    assert w[0] >= -1e-8 * max(w[-1], 1e-300)


@settings(max_examples=15, deadline=None)
@given(mixed_measures(), st.integers(1, 30), st.integers(1, 30))
def test_section_monotonicity(mu, a, b):
    n, m = sorted((a, b))
    big = build_section(mu, m)
    assert operator_norm(big.principal(n)) <= operator_norm(big) * (1 + 1e-12) + 1e-12


@settings(max_examples=15, deadline=None)
@given(mixed_measures(), st.integers(1, 24))
def test_adjoint_section_is_transpose(mu, n):
    G = build_section(mu, n).entries()
    H = build_section(mu, n, adjoint=True).entries()
    assert np.max(np.abs(H - G.T)) <= 1e-9 * max(1.0, np.max(np.abs(G)))
    a, b = operator_norm(GramSection(n, "dense", dense=G)), operator_norm(GramSection(n, "dense", dense=H))
    assert a == pytest.approx(b, rel=1e-9)
