"""Mixing-angle ansatz and inverse-engineered drive fields.

The mixing angle ``theta`` follows a logistic (Vitanov) ramp from 0 to
pi/2 and ``phi`` is a Gaussian bump of height ``pi * phi0``; both live on
the symmetric window ``t in [-T/2, T/2]``.  Derivatives are analytic.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from .model import SQRT2, SystemParams

#: Below this value of phi the cotangent in the coupling design is refused.
PHI_FLOOR = 1e-8

DEFAULT_SAMPLES = 2001

DRIVE_CSV_HEADER = ("t", "omega_L", "omega_R", "omega_M", "gA_L", "gA_R")


class SingularAngleError(ValueError):
    """phi dropped below :data:`PHI_FLOOR`, so cot(phi) is near-singular."""


class UndefinedZenoRatioError(ValueError):
    """Coupling magnitude vanishes on the whole grid."""


@dataclass(frozen=True)
class PulseParams:
    """Shape parameters; all times in units of 1/g."""

    T: float
    tau: float
    tauC: float
    phi0: float

    def __post_init__(self):
        for name in ("T", "tau", "tauC"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if not 0 < self.phi0 < np.pi / 2:
            raise ValueError(f"phi0 must lie in (0, pi/2), got {self.phi0!r}")

    @classmethod
    def from_ratios(cls, T: float, phi0: float, tau_ratio: float = 0.1,
                    tauc_ratio: float = 0.3) -> "PulseParams":
        """Shape with tau and tauC proportional to T (0.1T and 0.3T by default)."""
        return cls(T=T, tau=tau_ratio * T, tauC=tauc_ratio * T, phi0=phi0)

    @property
    def t_initial(self) -> float:
        return -0.5 * self.T

    @property
    def t_final(self) -> float:
        return 0.5 * self.T

    def grid(self, n: int = DEFAULT_SAMPLES) -> np.ndarray:
        if n < 2:
            raise ValueError("grid needs at least 2 samples")
        return np.linspace(self.t_initial, self.t_final, n)


def theta(t, pp: PulseParams):
    return 0.5 * np.pi * expit(np.asarray(t, dtype=float) / pp.tau)


def theta_dot(t, pp: PulseParams):
    x = np.asarray(t, dtype=float) / pp.tau
    return 0.5 * np.pi / pp.tau * expit(x) * expit(-x)


def phi(t, pp: PulseParams):
    t = np.asarray(t, dtype=float)
    return np.pi * pp.phi0 * np.exp(-(t / pp.tauC) ** 2)


def phi_dot(t, pp: PulseParams):
    t = np.asarray(t, dtype=float)
    return -2.0 * t / pp.tauC ** 2 * phi(t, pp)


def effective_couplings(t, pp: PulseParams):
    """Effective couplings ``(g1*alpha_L, g2*alpha_R)`` that keep the
    invariant dynamical.

    Raises
    ------
    SingularAngleError
        If ``phi(t)`` falls below :data:`PHI_FLOOR` anywhere in ``t``.
    """
    th = theta(t, pp)
    ph = phi(t, pp)
    if np.any(ph < PHI_FLOOR):
        raise SingularAngleError(f"phi below {PHI_FLOOR:g} rad; cot(phi) is near-singular")
    a = theta_dot(t, pp) / np.tan(ph)
    b = phi_dot(t, pp)
    gA_L = -SQRT2 * (a * np.sin(th) + b * np.cos(th))
    gA_R = -SQRT2 * (a * np.cos(th) - b * np.sin(th))
    return gA_L, gA_R


def coupling_magnitude(t, pp: PulseParams):
    """Omega(t) = sqrt(2 [(theta_dot cot phi)^2 + phi_dot^2])."""
    ph = phi(t, pp)
    if np.any(ph < PHI_FLOOR):
        raise SingularAngleError(f"phi below {PHI_FLOOR:g} rad; cot(phi) is near-singular")
    return np.sqrt(2.0 * ((theta_dot(t, pp) / np.tan(ph)) ** 2 + phi_dot(t, pp) ** 2))


def mixing_phase(t, pp: PulseParams):
    """Angle rho with gA_L = -Omega sin(rho) and gA_R = -Omega cos(rho)."""
    return theta(t, pp) + np.arctan(phi_dot(t, pp) / (theta_dot(t, pp) / np.tan(phi(t, pp))))


@dataclass(frozen=True)
class DriveSample:
    """Drive amplitudes at time(s) ``t``; fields are scalars or equal-length arrays."""

    t: np.ndarray
    omega_L: np.ndarray
    omega_R: np.ndarray
    omega_M: np.ndarray
    gA_L: np.ndarray
    gA_R: np.ndarray


def design_drives(t, pp: PulseParams, p: SystemParams) -> DriveSample:
    """Classical drives producing the designed effective couplings.

    With alpha = Omega / (-Delta0) the side drives follow from the couplings,
    and the middle drive keeps the middle cavity dark.
    """
    J = p.J
    gA_L, gA_R = effective_couplings(t, pp)
    omega_L = -p.Delta0 * gA_L / p.g1
    omega_R = -p.Delta0 * gA_R / p.g2
    omega_M = -(J / p.Delta0) * (omega_L + omega_R)
    return DriveSample(
        t=np.asarray(t, dtype=float),
        omega_L=omega_L,
        omega_R=omega_R,
        omega_M=omega_M,
        gA_L=p.g1 * omega_L / (-p.Delta0),
        gA_R=p.g2 * omega_R / (-p.Delta0),
    )


@dataclass(frozen=True)
class PulseSchedule:
    """Drive fields sampled on a uniform grid over [-T/2, T/2]."""

    params: PulseParams
    system: SystemParams
    samples: DriveSample

    @property
    def times(self) -> np.ndarray:
        return self.samples.t

    def __len__(self):
        return len(self.samples.t)

    def to_rows(self):
        s = self.samples
        return np.column_stack([s.t, s.omega_L, s.omega_R, s.omega_M, s.gA_L, s.gA_R])

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(DRIVE_CSV_HEADER)
            for row in self.to_rows():
                writer.writerow([repr(float(x)) for x in row])
        return path


def build_schedule(pp: PulseParams, p: SystemParams, n_samples: int = DEFAULT_SAMPLES) -> PulseSchedule:
    return PulseSchedule(pp, p, design_drives(pp.grid(n_samples), pp, p))


@dataclass(frozen=True)
class BoundaryReport:
    """Residuals of the ideal boundary conditions at t = -T/2 and t = +T/2."""

    theta_initial: float
    theta_final: float
    theta_dot_initial: float
    theta_dot_final: float
    phi_initial: float
    phi_final: float
    phi_dot_initial: float
    phi_dot_final: float
    tol: float

    @property
    def residuals(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if k != "tol"}

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol


def check_boundaries(pp: PulseParams, tol: float = 1e-2) -> BoundaryReport:
    """Compare the ansatz against theta: 0 -> pi/2 and phi: 0 -> 0 with
    vanishing derivatives.  These are met only asymptotically for finite T."""
    ti, tf = pp.t_initial, pp.t_final
    return BoundaryReport(
        theta_initial=float(abs(theta(ti, pp))),
        theta_final=float(abs(theta(tf, pp) - 0.5 * np.pi)),
        theta_dot_initial=float(abs(theta_dot(ti, pp))),
        theta_dot_final=float(abs(theta_dot(tf, pp))),
        phi_initial=float(abs(phi(ti, pp))),
        phi_final=float(abs(phi(tf, pp))),
        phi_dot_initial=float(abs(phi_dot(ti, pp))),
        phi_dot_final=float(abs(phi_dot(tf, pp))),
        tol=tol,
    )


def min_zeno_ratio(schedule: PulseSchedule, p: SystemParams) -> float:
    """Smallest K = sqrt(2) J / Omega(t) over the schedule grid."""
    s = schedule.samples
    Omega = np.hypot(s.gA_L, s.gA_R)
    peak = float(np.max(Omega))
    if not peak > 0:
        raise UndefinedZenoRatioError("Omega vanishes on the whole grid")
    return SQRT2 * p.J / peak
