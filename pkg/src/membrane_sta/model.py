"""Coupled-mode model of the two-membrane, three-subcavity system.

All rates are in units of the bare optomechanical coupling ``g`` and all
times in units of ``1/g``.  The fluctuation vector is ordered
``(da_L, da_M, da_R, db_1, db_2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

#: Reference coupling used for SI conversion, g = 2*pi*10 kHz (rad/s).
G_SI = 2.0 * np.pi * 10.0e3

# Mode indices in the fluctuation vector.
A_L, A_M, A_R, B_1, B_2 = range(5)
MODE_LABELS = ("aL", "aM", "aR", "b1", "b2")

SQRT2 = np.sqrt(2.0)


class DegenerateDecompositionError(ValueError):
    """Raised when the Zeno decomposition is undefined (zero coupling)."""


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the linearized model, in units of g."""

    g1: float = 1.0
    g2: float = 1.0
    J1: float = 50.0
    J2: float = 50.0
    Delta0: float = 100.0
    gammaL: float = 0.0
    gammaM: float = 0.0
    gammaR: float = 0.0
    gammaM1: float = 0.0
    gammaM2: float = 0.0

    decay_names = ("gammaL", "gammaM", "gammaR", "gammaM1", "gammaM2")

    def __post_init__(self):
        for name in ("g1", "g2", "Delta0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)!r}")
        for name in ("J1", "J2") + self.decay_names:
            value = getattr(self, name)
            if not value >= 0:
                raise ValueError(f"{name} must be >= 0, got {value!r}")

    @property
    def decay_rates(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in self.decay_names], dtype=float)

    @property
    def has_decay(self) -> bool:
        return bool(np.any(self.decay_rates > 0))

    @property
    def J(self) -> float:
        """Common tunneling rate; only defined for symmetric tunneling."""
        if self.J1 != self.J2:
            raise ValueError(f"symmetric tunneling required, got J1={self.J1}, J2={self.J2}")
        return self.J1

    def mim_consistent(self, rtol: float = 1e-12) -> bool:
        """Whether J_k = omega_m,k / 2 holds with omega_m,k = Delta0."""
        half = 0.5 * self.Delta0
        return bool(np.isclose(self.J1, half, rtol=rtol) and np.isclose(self.J2, half, rtol=rtol))

    def without_decay(self) -> "SystemParams":
        return SystemParams(self.g1, self.g2, self.J1, self.J2, self.Delta0)

    def with_uniform_decay(self, gamma: float) -> "SystemParams":
        """Copy with every cavity and membrane rate set to ``gamma``."""
        return SystemParams(self.g1, self.g2, self.J1, self.J2, self.Delta0,
                            gamma, gamma, gamma, gamma, gamma)


def rate_to_si(rate):
    """Convert a rate in units of g to rad/s."""
    return np.asarray(rate) * G_SI


def time_to_si(t):
    """Convert a time in units of 1/g to seconds."""
    return np.asarray(t) / G_SI


def build_interaction_matrix(p: SystemParams, gA_L, gA_R, include_decay: bool = True):
    """Interaction matrix M of ``i d/dt Psi = M Psi``.

    ``gA_L`` and ``gA_R`` (the products g1*alpha_L and g2*alpha_R) may be
    scalars or arrays; the result has shape ``broadcast_shape + (5, 5)``.
    """
    gA_L, gA_R = np.broadcast_arrays(np.asarray(gA_L, dtype=float), np.asarray(gA_R, dtype=float))
    M = np.zeros(gA_L.shape + (5, 5), dtype=complex)
    M[..., A_L, A_M] = M[..., A_M, A_L] = -p.J1
    M[..., A_M, A_R] = M[..., A_R, A_M] = -p.J2
    M[..., A_L, B_1] = M[..., B_1, A_L] = -gA_L
    M[..., A_R, B_2] = M[..., B_2, A_R] = gA_R
    if include_decay:
        idx = np.arange(5)
        M[..., idx, idx] = -0.5j * p.decay_rates
    return M


class ZenoDecomposition(NamedTuple):
    Mp: np.ndarray
    K: float
    Mq: np.ndarray
    Omega: float


def zeno_decompose(p: SystemParams, gA_L: float, gA_R: float) -> ZenoDecomposition:
    """Split the decay-free M into Omega * (Mp + K * Mq)."""
    J = p.J
    Omega = float(np.hypot(gA_L, gA_R))
    if Omega == 0.0:
        raise DegenerateDecompositionError("Omega = 0: Zeno ratio K is undefined")
    Mp = np.zeros((5, 5), dtype=complex)
    Mp[A_L, B_1] = Mp[B_1, A_L] = -gA_L / Omega
    Mp[A_R, B_2] = Mp[B_2, A_R] = gA_R / Omega
    Mq = np.zeros((5, 5), dtype=complex)
    Mq[A_L, A_M] = Mq[A_M, A_L] = Mq[A_M, A_R] = Mq[A_R, A_M] = -1.0 / SQRT2
    return ZenoDecomposition(Mp, SQRT2 * J / Omega, Mq, Omega)


def zeno_basis() -> np.ndarray:
    """Dark-subspace basis as the columns (psi1, psi2, psi3) of a 5x3 array."""
    basis = np.zeros((5, 3), dtype=complex)
    basis[B_1, 0] = 1.0
    basis[B_2, 1] = 1.0
    basis[A_L, 2] = 1.0 / SQRT2
    basis[A_R, 2] = -1.0 / SQRT2
    return basis


PSI1, PSI2, PSI3 = zeno_basis().T.copy()


def build_effective_matrix(gA_L, gA_R):
    """Effective 3x3 matrix in the (psi1, psi2, psi3) basis; broadcasts like
    :func:`build_interaction_matrix`."""
    gA_L, gA_R = np.broadcast_arrays(np.asarray(gA_L, dtype=float), np.asarray(gA_R, dtype=float))
    M = np.zeros(gA_L.shape + (3, 3), dtype=complex)
    M[..., 0, 2] = M[..., 2, 0] = -gA_L / SQRT2
    M[..., 1, 2] = M[..., 2, 1] = -gA_R / SQRT2
    return M


def embed_dark(v3) -> np.ndarray:
    """Map dark-basis coefficients (..., 3) to the 5-mode vector (..., 5)."""
    return np.asarray(v3) @ zeno_basis().T


def project_dark(state) -> np.ndarray:
    """Dark-basis coefficients <psi_i|state> of a 5-mode vector (..., 5)."""
    return np.asarray(state) @ zeno_basis().conj()
