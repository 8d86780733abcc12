"""Propagation of the fluctuation amplitudes and the derived observables."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .integrate import rk4_linear
from .model import B_1, B_2, PSI3, SystemParams, build_effective_matrix, build_interaction_matrix, project_dark
from .pulse import PulseSchedule, effective_couplings

TRAJECTORY_CSV_HEADER = ("t", "n_aL", "n_aM", "n_aR", "n_b1", "n_b2", "n_psi3")

#: Final-state deviation between step counts n and 2n above which a run is flagged.
CONVERGENCE_TOL = 1e-6

INITIAL_B1 = np.array([0, 0, 0, 1, 0], dtype=complex)


class UnderResolvedWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    step_count: int = 4000
    convergence_check: bool = False

    def __post_init__(self):
        if self.step_count < 100:
            raise ValueError(f"step_count must be >= 100, got {self.step_count}")

    def doubled(self) -> "IntegratorConfig":
        return IntegratorConfig(2 * self.step_count, False)


@dataclass
class Trajectory:
    """States on the integrator grid.

    ``basis`` is ``"modes"`` for 5-component fluctuation vectors or
    ``"dark"`` for (psi1, psi2, psi3) coefficients.
    """

    times: np.ndarray
    states: np.ndarray
    basis: str = "modes"
    convergence_deviation: float | None = None

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=-1)

    @property
    def occupations(self) -> np.ndarray:
        return np.abs(self.states) ** 2

    @property
    def under_resolved(self) -> bool:
        return self.convergence_deviation is not None and self.convergence_deviation > CONVERGENCE_TOL

    def dark_coefficients(self) -> np.ndarray:
        return self.states if self.basis == "dark" else project_dark(self.states)

    def psi3_occupation(self) -> np.ndarray:
        return np.abs(self.dark_coefficients()[:, 2]) ** 2

    def to_csv(self, path) -> Path:
        if self.basis != "modes":
            raise ValueError("only 5-mode trajectories have a per-mode CSV layout")
        path = Path(path)
        table = np.column_stack([self.times, self.occupations, self.psi3_occupation()])
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRAJECTORY_CSV_HEADER)
            for row in table:
                writer.writerow([repr(float(x)) for x in row])
        return path


def full_generator(schedule: PulseSchedule, p: SystemParams, include_decay: bool):
    """t -> -i M(t), with the drives re-evaluated analytically."""
    pp = schedule.params

    def generator(t):
        return -1j * build_interaction_matrix(p, *effective_couplings(t, pp), include_decay=include_decay)

    return generator


def effective_generator(schedule: PulseSchedule):
    pp = schedule.params

    def generator(t):
        return -1j * build_effective_matrix(*effective_couplings(t, pp))

    return generator


def _run(generator, initial, schedule, cfg, basis):
    pp = schedule.params
    times, states = rk4_linear(generator, initial, pp.t_initial, pp.t_final, cfg.step_count)
    traj = Trajectory(times, states, basis)
    if cfg.convergence_check:
        _, fine = rk4_linear(generator, initial, pp.t_initial, pp.t_final, 2 * cfg.step_count, keep=False)
        traj.convergence_deviation = float(np.max(np.abs(fine - traj.final)))
        if traj.under_resolved:
            warnings.warn(
                f"final state moved by {traj.convergence_deviation:.3g} on step doubling "
                f"(step_count={cfg.step_count})", UnderResolvedWarning, stacklevel=3)
    return traj


def integrate_pure(initial, schedule: PulseSchedule, p: SystemParams | None = None,
                   include_decay: bool = False, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Propagate ``i dPsi/dt = M(t) Psi`` over the schedule window.

    Input-noise operators are not modelled; only the deterministic
    amplitudes are propagated.  ``include_decay`` switches on the
    ``-i gamma/2`` diagonal of M.
    """
    p = schedule.system if p is None else p
    cfg = cfg or IntegratorConfig()
    initial = np.asarray(initial, dtype=complex)
    if initial.shape != (5,):
        raise ValueError(f"expected 5 amplitudes, got shape {initial.shape}")
    if not include_decay and not np.isclose(np.linalg.norm(initial), 1.0, atol=1e-12):
        raise ValueError("initial state must be normalized")
    return _run(full_generator(schedule, p, include_decay), initial, schedule, cfg, "modes")


def integrate_effective(initial3, schedule: PulseSchedule, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Propagate ``i dv/dt = M_eff(t) v`` in the dark basis."""
    cfg = cfg or IntegratorConfig()
    initial3 = np.asarray(initial3, dtype=complex)
    if initial3.shape != (3,):
        raise ValueError(f"expected 3 dark-basis amplitudes, got shape {initial3.shape}")
    if not np.isclose(np.linalg.norm(initial3), 1.0, atol=1e-12):
        raise ValueError("initial state must be normalized")
    return _run(effective_generator(schedule), initial3, schedule, cfg, "dark")


def fidelity_pure(traj: Trajectory) -> float:
    """Final occupation of the second membrane mode."""
    index = 1 if traj.basis == "dark" else B_2
    return float(abs(traj.final[index]) ** 2)


def occupations(state) -> np.ndarray:
    """Per-mode |amplitude|^2 of a fluctuation vector."""
    return np.abs(np.asarray(state)) ** 2


def psi3_occupancy(state) -> float:
    """|<psi3|state>|^2, the weight on the lossy intermediate combination."""
    return float(abs(np.vdot(PSI3, state)) ** 2)


def b1_occupation(traj: Trajectory) -> float:
    index = 0 if traj.basis == "dark" else B_1
    return float(abs(traj.final[index]) ** 2)
