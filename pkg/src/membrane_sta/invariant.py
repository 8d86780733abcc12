"""Dynamical invariant of the effective three-mode problem.

Everything here is expressed in the dark basis (psi1, psi2, psi3).  The
invariant is parametrized by the mixing angles, and the drives designed in
:mod:`membrane_sta.pulse` make it an exact constant of motion of
``i dv/dt = M_eff v``, i.e. ``dI/dt + i [M_eff, I] = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .model import build_effective_matrix
from .pulse import DEFAULT_SAMPLES, PulseParams, effective_couplings, phi, phi_dot, theta, theta_dot


@dataclass(frozen=True)
class InvariantMatrix:
    """Invariant (3x3, or a stack of them for array-valued angles)."""

    mat: np.ndarray
    theta: np.ndarray
    phi: np.ndarray

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.mat)


def _invariant_entries(th, ph):
    th, ph = np.broadcast_arrays(np.asarray(th, dtype=float), np.asarray(ph, dtype=float))
    out = np.zeros(th.shape + (3, 3), dtype=complex)
    c13 = np.cos(ph) * np.sin(th)
    c23 = np.cos(ph) * np.cos(th)
    out[..., 0, 2] = out[..., 2, 0] = c13
    out[..., 1, 2] = out[..., 2, 1] = c23
    out[..., 0, 1] = -1j * np.sin(ph)
    out[..., 1, 0] = 1j * np.sin(ph)
    return out


def build_invariant(theta_value: float, phi_value: float) -> InvariantMatrix:
    return InvariantMatrix(_invariant_entries(theta_value, phi_value), np.asarray(theta_value), np.asarray(phi_value))


def invariant_time_derivative(t, pp: PulseParams):
    """Analytic dI/dt along the pulse (chain rule through theta and phi)."""
    th, ph = theta(t, pp), phi(t, pp)
    thd, phd = theta_dot(t, pp), phi_dot(t, pp)
    th, ph, thd, phd = np.broadcast_arrays(th, ph, thd, phd)
    out = np.zeros(th.shape + (3, 3), dtype=complex)
    d13 = -np.sin(ph) * phd * np.sin(th) + np.cos(ph) * np.cos(th) * thd
    d23 = -np.sin(ph) * phd * np.cos(th) - np.cos(ph) * np.sin(th) * thd
    ds = np.cos(ph) * phd
    out[..., 0, 2] = out[..., 2, 0] = d13
    out[..., 1, 2] = out[..., 2, 1] = d23
    out[..., 0, 1] = -1j * ds
    out[..., 1, 0] = 1j * ds
    return out


def dark_eigenvector(theta_value, phi_value):
    """Zero-eigenvalue eigenvector of the invariant in the dark basis.

    The gauge is fixed so that the psi1 component is real and non-negative.
    """
    th, ph = np.broadcast_arrays(np.asarray(theta_value, dtype=float), np.asarray(phi_value, dtype=float))
    v = np.stack([np.cos(ph) * np.cos(th), -np.cos(ph) * np.sin(th), -1j * np.sin(ph)], axis=-1)
    sign = np.where(v[..., 0].real < 0, -1.0, 1.0)
    return v * sign[..., None]


def dark_path(t, pp: PulseParams):
    """Dark eigenvector evaluated along the pulse, shape (len(t), 3)."""
    return dark_eigenvector(theta(t, pp), phi(t, pp))


def dark_path_derivative(t, pp: PulseParams):
    th, ph = theta(t, pp), phi(t, pp)
    thd, phd = theta_dot(t, pp), phi_dot(t, pp)
    return np.stack([
        -np.sin(ph) * phd * np.cos(th) - np.cos(ph) * np.sin(th) * thd,
        np.sin(ph) * phd * np.sin(th) - np.cos(ph) * np.cos(th) * thd,
        -1j * np.cos(ph) * phd,
    ], axis=-1)


def von_neumann_residual(t, pp: PulseParams, gA_L=None, gA_R=None):
    """Max-abs entry of ``dI/dt + i [M_eff, I]`` at time(s) ``t``.

    The couplings default to the designed ones; pass ``gA_L``/``gA_R`` to
    probe other drives.  Returns a scalar for scalar ``t``, else an array.
    """
    dL, dR = effective_couplings(t, pp)
    gA_L = dL if gA_L is None else gA_L
    gA_R = dR if gA_R is None else gA_R
    M = build_effective_matrix(gA_L, gA_R)
    inv = _invariant_entries(theta(t, pp), phi(t, pp))
    res = invariant_time_derivative(t, pp) + 1j * (M @ inv - inv @ M)
    return np.abs(res).max(axis=(-2, -1))


def lr_integrand(t, pp: PulseParams):
    """<phi0| i d/dt - M_eff |phi0> along the dark path (complex, should be real)."""
    v = dark_path(t, pp)
    dv = dark_path_derivative(t, pp)
    M = build_effective_matrix(*effective_couplings(t, pp))
    Mv = np.einsum("...ij,...j->...i", M, v)
    return np.einsum("...i,...i->...", v.conj(), 1j * dv - Mv)


def lewis_riesenfeld_phase(pp: PulseParams, n_samples: int = DEFAULT_SAMPLES) -> float:
    """Phase accumulated along the dark path over [-T/2, T/2] (Simpson rule)."""
    t = pp.grid(n_samples)
    return float(simpson(lr_integrand(t, pp).real, x=t))
