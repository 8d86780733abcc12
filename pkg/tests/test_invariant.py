import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from membrane_sta.dynamics import IntegratorConfig, integrate_effective
from membrane_sta.invariant import (
    build_invariant, dark_eigenvector, dark_path, invariant_time_derivative, lewis_riesenfeld_phase,
    lr_integrand, von_neumann_residual)
from membrane_sta.model import build_effective_matrix
from membrane_sta.pulse import PulseParams, effective_couplings, phi, theta

angles = st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False)


def test_invariant_substitutions():
    I = build_invariant(0.0, 0.0).mat
    expected = np.zeros((3, 3))
    expected[1, 2] = expected[2, 1] = 1.0
    np.testing.assert_allclose(I, expected, atol=1e-16)
    I = build_invariant(np.pi / 2, np.pi / 2).mat
    expected = np.zeros((3, 3), dtype=complex)
    expected[0, 1], expected[1, 0] = -1j, 1j
    np.testing.assert_allclose(I, expected, atol=1e-16)


@given(angles, angles)
def test_constant_spectrum(th, ph):
    inv = build_invariant(th, ph)
    np.testing.assert_allclose(inv.mat, inv.mat.conj().T)
    np.testing.assert_allclose(inv.eigenvalues(), [-1, 0, 1], atol=1e-12)


@given(angles, angles)
def test_dark_vector_is_null_and_normalized(th, ph):
    v = dark_eigenvector(th, ph)
    assert np.max(np.abs(build_invariant(th, ph).mat @ v)) < 1e-12
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-14)
    assert v[0].imag == 0 and v[0].real >= 0


def test_dark_vector_endpoints():
    np.testing.assert_allclose(dark_eigenvector(0.0, 0.0), [1, 0, 0], atol=1e-16)
    np.testing.assert_allclose(dark_eigenvector(np.pi / 2, 0.0), [0, -1, 0], atol=1e-16)


def test_invariant_derivative_matches_finite_difference(default_pulse):
    t = default_pulse.grid(41)
    h = 1e-6
    fd = (build_invariant(theta(t + h, default_pulse), phi(t + h, default_pulse)).mat
          - build_invariant(theta(t - h, default_pulse), phi(t - h, default_pulse)).mat) / (2 * h)
    np.testing.assert_allclose(invariant_time_derivative(t, default_pulse), fd, atol=1e-6)


@pytest.mark.parametrize("T,phi0", [(1.0, 0.1), (0.35, 0.15), (0.5, 0.4)])
def test_von_neumann_residual_vanishes(T, phi0):
    pp = PulseParams.from_ratios(T, phi0)
    assert np.max(von_neumann_residual(pp.grid(), pp)) <= 1e-8


def test_perturbed_drives_break_invariance(default_pulse):
    t = np.array([-0.1, 0.0, 0.2])
    gl, gr = effective_couplings(t, default_pulse)
    # oracle: commutator evaluated explicitly with the perturbed matrix
    I = build_invariant(theta(t, default_pulse), phi(t, default_pulse)).mat
    M = build_effective_matrix(1.1 * gl, gr)
    explicit = np.abs(invariant_time_derivative(t, default_pulse) + 1j * (M @ I - I @ M)).max(axis=(1, 2))
    res = von_neumann_residual(t, default_pulse, gA_L=1.1 * gl)
    np.testing.assert_allclose(res, explicit, rtol=1e-14)
    assert np.all(res > 0.1)


def test_frozen_angles_zero_drives():
    # far from the ramp the angles are frozen and the designed drives vanish
    pp = PulseParams(T=1.0, tau=1e-3, tauC=1e8, phi0=0.1)
    assert von_neumann_residual(0.4, pp, gA_L=0.0, gA_R=0.0) < 1e-13


@pytest.mark.parametrize("T,phi0", [(1.0, 0.1), (0.35, 0.15)])
def test_lewis_riesenfeld_phase_vanishes(T, phi0):
    pp = PulseParams.from_ratios(T, phi0)
    assert np.max(np.abs(lr_integrand(pp.grid(), pp))) <= 1e-10
    assert abs(lewis_riesenfeld_phase(pp)) <= 1e-8


def test_dark_path_matches_effective_integration(default_pulse, default_schedule):
    t0 = default_pulse.t_initial
    start = dark_eigenvector(theta(t0, default_pulse), phi(t0, default_pulse))
    traj = integrate_effective(start, default_schedule, IntegratorConfig(4000))
    analytic = dark_path(traj.times, default_pulse)
    assert np.max(np.abs(traj.states - analytic)) <= 1e-4
