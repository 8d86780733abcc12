"""Steady-state cavity amplitudes, the dark-cavity drive and regime checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SystemParams
from .pulse import PulseSchedule


class SingularSteadyStateError(ValueError):
    """The steady-state equations have no unique solution."""


@dataclass(frozen=True)
class SteadyAmplitudes:
    alphaL: complex
    alphaM: complex
    alphaR: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.alphaL, self.alphaM, self.alphaR], dtype=complex)


def _steady_system(p: SystemParams, detuning_shift=(0.0, 0.0, 0.0)):
    """Coefficient matrix of d(alpha)/dt = 0 written as A @ alpha = b / (-i)."""
    dL, dM, dR = (p.Delta0 + s for s in detuning_shift)
    return np.array([
        [-(p.gammaL / 2 + 1j * dL), 1j * p.J1, 0.0],
        [1j * p.J1, -(p.gammaM / 2 + 1j * dM), 1j * p.J2],
        [0.0, 1j * p.J2, -(p.gammaR / 2 + 1j * dR)],
    ], dtype=complex)


def steady_state_amplitudes(omega_L, omega_R, omega_M, p: SystemParams,
                            detuning_shift=(0.0, 0.0, 0.0)) -> SteadyAmplitudes:
    """Solve the linear steady-state equations of the mean cavity fields.

    ``detuning_shift`` adds the mechanical shifts to the effective
    detunings of (L, M, R); by default every detuning equals Delta0.
    The drives may be complex.
    """
    A = _steady_system(p, detuning_shift)
    b = 1j * np.array([omega_L, omega_M, omega_R], dtype=complex)
    # condition-number guard: exactly singular matrices do not always raise
    if np.linalg.cond(A) > 1e14:
        raise SingularSteadyStateError("steady-state equations are singular; no unique steady state")
    try:
        alpha_L, alpha_M, alpha_R = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSteadyStateError(str(exc)) from exc
    return SteadyAmplitudes(complex(alpha_L), complex(alpha_M), complex(alpha_R))


def fixed_point_residual(amps: SteadyAmplitudes, omega_L, omega_R, omega_M, p: SystemParams,
                         detuning_shift=(0.0, 0.0, 0.0)) -> float:
    """Max deviation from alpha_j = (Omega_j - couplings) / (-Delta'_j + i gamma_j / 2)."""
    dL, dM, dR = (p.Delta0 + s for s in detuning_shift)
    aL, aM, aR = amps.alphaL, amps.alphaM, amps.alphaR
    rhs = np.array([
        (omega_L - p.J1 * aM) / (-dL + 0.5j * p.gammaL),
        (omega_M - p.J1 * aL - p.J2 * aR) / (-dM + 0.5j * p.gammaM),
        (omega_R - p.J2 * aM) / (-dR + 0.5j * p.gammaR),
    ])
    return float(np.max(np.abs(rhs - np.array([aL, aM, aR]))))


def middle_drive_for_dark_cavity(p: SystemParams, omega_L, omega_R):
    """Middle drive that leaves the middle cavity empty (decay-free limit)."""
    return -(p.J / p.Delta0) * (np.asarray(omega_L) + np.asarray(omega_R))


def coupling_constants(Xi, cavity_length, mass1, mass2, omega_m1, omega_m2, hbar: float = 1.0):
    """Optomechanical couplings g_k = (Xi / L) sqrt(hbar / (2 m_k omega_m,k))."""
    values = (Xi, cavity_length, mass1, mass2, omega_m1, omega_m2)
    if any(not v > 0 for v in values):
        raise ValueError("all inputs must be > 0")
    scale = Xi / cavity_length
    return (scale * np.sqrt(hbar / (2.0 * mass1 * omega_m1)),
            scale * np.sqrt(hbar / (2.0 * mass2 * omega_m2)))


@dataclass(frozen=True)
class ValidityReport:
    ratio: float
    peak_coupling: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.ratio >= self.threshold


def validate_rwa(p: SystemParams, schedule: PulseSchedule, threshold: float = 10.0) -> ValidityReport:
    """Check that Delta0 dominates the largest effective coupling.

    A schedule without drives reports an infinite ratio.
    """
    s = schedule.samples
    peak = float(max(np.max(np.abs(s.gA_L)), np.max(np.abs(s.gA_R))))
    ratio = float("inf") if peak == 0.0 else p.Delta0 / peak
    return ValidityReport(ratio, peak, threshold)
