"""Averaged dynamics under white amplitude noise on the two side drives.

The density matrix obeys

    drho/dt = -i (M rho - rho M^dag) - c mu^2 sum_k [M_k, [M_k, rho]]

where M_k are the noise generators of the left and right drives and
``c`` is 1 (``"printed"``) or 1/2 (``"novikov"``).  The equation is
integrated as a 25-dimensional linear system with the same RK4 stepping
as the pure-state propagation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import IntegratorConfig, UnderResolvedWarning
from .integrate import rk4_linear
from .model import A_L, A_R, B_1, B_2, PSI2, SystemParams, build_interaction_matrix
from .pulse import PulseSchedule, design_drives, effective_couplings

NOISE_PREFACTORS = {"printed": 1.0, "novikov": 0.5}

TRACE_DRIFT_TOL = 1e-6
HERMITICITY_DRIFT_TOL = 1e-8


def noise_jump_matrices(t, schedule: PulseSchedule, p: SystemParams | None = None):
    """Noise generators ``(M_aL, M_aR)`` at time(s) ``t``.

    ``M_aL = g1 Omega_L / (-Delta0)`` on the (aL, b1) pair and
    ``M_aR = g2 Omega_R / (-Delta0)`` on the (aR, b2) pair.
    """
    p = schedule.system if p is None else p
    d = design_drives(t, schedule.params, p)
    return _jump_from_drives(p.g1 * d.omega_L / (-p.Delta0), p.g2 * d.omega_R / (-p.Delta0))


def _jump_from_drives(cL, cR):
    cL, cR = np.broadcast_arrays(np.asarray(cL, dtype=float), np.asarray(cR, dtype=float))
    ML = np.zeros(cL.shape + (5, 5), dtype=complex)
    MR = np.zeros(cL.shape + (5, 5), dtype=complex)
    ML[..., A_L, B_1] = ML[..., B_1, A_L] = cL
    MR[..., A_R, B_2] = MR[..., B_2, A_R] = cR
    return ML, MR


def _left(A):
    # vec(A rho) for row-major vec: A kron I
    return np.einsum("...ij,kl->...ikjl", A, np.eye(5)).reshape(A.shape[:-2] + (25, 25))


def _right(B):
    # vec(rho B) for row-major vec: I kron B^T
    return np.einsum("ij,...lk->...ikjl", np.eye(5), B).reshape(B.shape[:-2] + (25, 25))


def liouvillian(M, jumps, rate):
    """Superoperator (..., 25, 25) acting on row-major vec(rho)."""
    L = -1j * (_left(M) - _right(M.conj().swapaxes(-1, -2)))
    for K in jumps:
        K2 = K @ K
        L = L - rate * (_left(K2) + _right(K2) - 2.0 * (_left(K) @ _right(K)))
    return L


def density_generator(schedule: PulseSchedule, p: SystemParams, mu: float,
                      include_decay: bool = False, prefactor: str = "printed"):
    """t -> Liouvillian stack.

    The superoperator is affine in the couplings gA_L, gA_R (and in their
    squares through the noise terms), so it is assembled from five fixed
    25x25 pieces.
    """
    rate = NOISE_PREFACTORS[prefactor] * mu ** 2
    pp = schedule.params
    M0 = build_interaction_matrix(p, 0.0, 0.0, include_decay=include_decay)
    EL = build_interaction_matrix(p, 1.0, 0.0, include_decay=False) - build_interaction_matrix(p, 0.0, 0.0, False)
    ER = build_interaction_matrix(p, 0.0, 1.0, include_decay=False) - build_interaction_matrix(p, 0.0, 0.0, False)
    # unit noise generators; the drive-to-coupling map is gA = g * Omega / (-Delta0)
    KL, KR = _jump_from_drives(1.0, 1.0)
    zero = np.zeros((5, 5), dtype=complex)
    L0 = liouvillian(M0, (), 0.0)
    SL = liouvillian(EL, (), 0.0)
    SR = liouvillian(ER, (), 0.0)
    DL = liouvillian(zero, (KL,), rate)
    DR = liouvillian(zero, (KR,), rate)
    pieces = np.stack([L0, SL, SR, DL, DR]).reshape(5, 625)

    def generator(t):
        cL, cR = effective_couplings(t, pp)
        coeffs = np.stack([np.ones_like(cL), cL, cR, cL * cL, cR * cR], axis=-1).astype(complex)
        return (coeffs @ pieces).reshape(-1, 25, 25)

    return generator


@dataclass
class DensityEvolution:
    times: np.ndarray
    rhos: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.rhos[-1]

    @property
    def traces(self) -> np.ndarray:
        return np.trace(self.rhos, axis1=-2, axis2=-1)

    @property
    def trace_drift(self) -> float:
        return float(np.max(np.abs(self.traces - self.traces[0])))

    @property
    def hermiticity_drift(self) -> float:
        return float(np.max(np.abs(self.rhos - self.rhos.conj().swapaxes(-1, -2))))

    @property
    def purities(self) -> np.ndarray:
        return np.einsum("nij,nji->n", self.rhos, self.rhos).real


def pure_density(state) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    return np.outer(state, state.conj())


def evolve_density(initial, schedule: PulseSchedule, p: SystemParams | None = None, mu: float = 0.0,
                   cfg: IntegratorConfig | None = None, include_decay: bool = False,
                   prefactor: str = "printed") -> DensityEvolution:
    """Full density-matrix trajectory; see :func:`propagate_density`."""
    p = schedule.system if p is None else p
    cfg = cfg or IntegratorConfig()
    if mu < 0:
        raise ValueError("mu must be >= 0")
    if prefactor not in NOISE_PREFACTORS:
        raise ValueError(f"prefactor must be one of {sorted(NOISE_PREFACTORS)}")
    rho0 = np.asarray(initial, dtype=complex)
    if rho0.shape != (5, 5):
        raise ValueError(f"expected a 5x5 density matrix, got shape {rho0.shape}")
    if np.max(np.abs(rho0 - rho0.conj().T)) > 1e-12:
        raise ValueError("initial density matrix must be Hermitian")
    if abs(np.trace(rho0) - 1.0) > 1e-12:
        raise ValueError("initial density matrix must have unit trace")
    pp = schedule.params
    gen = density_generator(schedule, p, mu, include_decay, prefactor)
    times, vecs = rk4_linear(gen, rho0.reshape(25), pp.t_initial, pp.t_final, cfg.step_count)
    evo = DensityEvolution(times, vecs.reshape(-1, 5, 5))
    if not include_decay and (evo.trace_drift > TRACE_DRIFT_TOL or evo.hermiticity_drift > HERMITICITY_DRIFT_TOL):
        warnings.warn(
            f"density run under-resolved: trace drift {evo.trace_drift:.3g}, "
            f"Hermiticity drift {evo.hermiticity_drift:.3g}", UnderResolvedWarning, stacklevel=2)
    return evo


def propagate_density(initial, schedule: PulseSchedule, p: SystemParams | None = None, mu: float = 0.0,
                      cfg: IntegratorConfig | None = None, include_decay: bool = False,
                      prefactor: str = "printed") -> np.ndarray:
    """Final density matrix under the noise-averaged master equation.

    ``prefactor="printed"`` weights each double commutator by mu**2;
    ``"novikov"`` uses mu**2 / 2.  Decay is off by default.
    """
    return evolve_density(initial, schedule, p, mu, cfg, include_decay, prefactor).final


def fidelity_density(rho) -> float:
    """<psi2| rho |psi2>, equal to Tr[sqrt(rho2) rho sqrt(rho2)] for the
    projector rho2 = |psi2><psi2|."""
    return float(np.real(np.vdot(PSI2, np.asarray(rho) @ PSI2)))
