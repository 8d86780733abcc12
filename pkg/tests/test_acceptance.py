"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are repeated in a summary
section at the end of the pytest run.  Run this file alone with

    pytest tests/test_acceptance.py -v
"""

import time

import numpy as np
import pytest

from membrane_sta import experiments as ex
from membrane_sta.dynamics import (
    INITIAL_B1, b1_occupation, fidelity_pure, integrate_effective, integrate_pure)
from membrane_sta.invariant import build_invariant, lewis_riesenfeld_phase, von_neumann_residual
from membrane_sta.model import SystemParams, project_dark
from membrane_sta.noise import evolve_density, fidelity_density, propagate_density, pure_density
from membrane_sta.pulse import PulseParams, build_schedule
from membrane_sta.steady import (
    SingularSteadyStateError, fixed_point_residual, middle_drive_for_dark_cavity, steady_state_amplitudes)

pytestmark = pytest.mark.slow

SYSTEM = SystemParams()
RHO_B1 = pure_density(INITIAL_B1)
DECAY_RATES = (0.01, 0.05, 0.1, 0.5)


def _fidelity(T, phi0, system=SYSTEM, include_decay=False):
    sched = build_schedule(PulseParams.from_ratios(T, phi0), system)
    return fidelity_pure(integrate_pure(INITIAL_B1, sched, system, include_decay))


def _sweep(mode, grid, **kw):
    return ex.sweep_values(ex.ExperimentConfig(mode=mode, grid=grid, **kw)).values


def _monotone_failures(values, axis, increasing):
    d = np.diff(values, axis=axis)
    bad = d < 0 if increasing else d > 0
    return int(bad.sum()), float(np.max(-d if increasing else d))


def test_transfer_reproduction(report):
    sched = build_schedule(PulseParams.from_ratios(1.0, 0.1), SYSTEM)
    start = time.perf_counter()
    traj = integrate_pure(INITIAL_B1, sched)
    elapsed = time.perf_counter() - start
    F, nb1 = fidelity_pure(traj), b1_occupation(traj)
    ok = report("1 transfer (T=1, phi0=0.1)", F >= 0.99 and nb1 <= 0.01 and elapsed < 1.0,
                f"n_b2 = {F:.6f} (>= 0.99), n_b1 = {nb1:.2e} (<= 0.01), runtime {elapsed * 1e3:.0f} ms (< 1 s)")
    assert ok


def test_fast_operating_point(report):
    F = _fidelity(0.35, 0.15)
    assert report("2 operating point (T=0.35, phi0=0.15)", F >= 0.999, f"F = {F:.6f} (>= 0.999)")


def test_large_angle_degradation(report):
    F = _fidelity(1.0, 0.4)
    assert report("3 degradation (T=1, phi0=0.4)", F <= 0.985, f"F = {F:.6f} (<= 0.985)")


def test_fidelity_band_has_zeno_ratio_near_two(report):
    grid = ex.FIDELITY_GRID
    F = _sweep("sweep_fidelity", grid)
    K = _sweep("sweep_kmin", grid)
    band = (F >= 0.988) & (F <= 0.992)
    k = K[band]
    inside = (k >= 1.5) & (k <= 2.5)
    ok = band.any() and bool(inside.all())
    detail = (f"{int(band.sum())} cells with F in [0.988, 0.992] on the {grid.shape[0]}x{grid.shape[1]} grid; "
              f"{int(inside.sum())} have K_min in [1.5, 2.5]; K_min range [{k.min():.2f}, {k.max():.2f}]")
    assert report("4 F ~ 0.99 implies K_min ~ 2", ok, detail)


def test_intermediate_state_bound(report):
    sched = build_schedule(PulseParams.from_ratios(1.0, 0.15), SYSTEM)
    peak = float(np.max(integrate_pure(INITIAL_B1, sched).psi3_occupation()))
    ok = 0.18 <= peak <= 0.22
    assert report("5 peak psi3 occupancy (T=1, phi0=0.15)", ok, f"{peak:.4f} (in [0.18, 0.22])")


def test_invariant_suite(report):
    pp = PulseParams.from_ratios(1.0, 0.1)
    sched = build_schedule(pp, SYSTEM)
    residual = float(np.max(von_neumann_residual(sched.times, pp)))
    rng = np.random.default_rng(7)
    angles = rng.uniform(-np.pi, np.pi, size=(100, 2))
    spectrum = max(float(np.max(np.abs(build_invariant(th, ph).eigenvalues() - [-1, 0, 1]))) for th, ph in angles)
    phase = abs(lewis_riesenfeld_phase(pp))
    ok = residual <= 1e-8 and spectrum <= 1e-12 and phase <= 1e-8
    assert report("6 invariant suite", ok,
                  f"residual {residual:.1e} (<= 1e-8), spectrum error {spectrum:.1e} (<= 1e-12), "
                  f"phase {phase:.1e} (<= 1e-8)")


def test_conservation_suite(report):
    sched = build_schedule(PulseParams.from_ratios(1.0, 0.1), SYSTEM)
    norm = float(np.max(np.abs(integrate_pure(INITIAL_B1, sched).norms - 1)))
    trace = herm = 0.0
    for mu in (0.0, 0.05, 0.1):
        evo = evolve_density(RHO_B1, sched, mu=mu)
        trace = max(trace, float(np.max(np.abs(evo.traces - 1))))
        herm = max(herm, evo.hermiticity_drift)
    ok = norm <= 1e-9 and trace <= 1e-9 and herm <= 1e-10
    assert report("7 conservation suite", ok,
                  f"norm drift {norm:.1e} (<= 1e-9), trace drift {trace:.1e} (<= 1e-9), "
                  f"Hermiticity drift {herm:.1e} (<= 1e-10)")


def test_model_equivalence(report):
    sched = build_schedule(PulseParams.from_ratios(1.0, 0.1), SYSTEM)
    full = integrate_pure(INITIAL_B1, sched)
    eff = integrate_effective([1, 0, 0], sched)
    per_mode = np.max(np.abs(np.abs(project_dark(full.states)) ** 2 - eff.occupations), axis=0)
    rho_gap = abs(fidelity_density(propagate_density(RHO_B1, sched, mu=0.0)) - fidelity_pure(full))
    ok = bool(np.all(per_mode <= 1e-2)) and rho_gap <= 1e-8
    assert report("8 model equivalence (J=50)", ok,
                  f"5-mode vs 3-mode max deviation per mode (psi1, psi2, psi3) = "
                  f"({per_mode[0]:.4f}, {per_mode[1]:.4f}, {per_mode[2]:.4f}) (<= 1e-2); "
                  f"pure vs density fidelity gap {rho_gap:.1e} (<= 1e-8)")


def test_noise_trends(report):
    grid = ex.ROBUSTNESS_GRID
    F = _sweep("sweep_noise", grid, mu=0.05)
    nT, dT = _monotone_failures(F, 0, increasing=True)
    nP, dP = _monotone_failures(F, 1, increasing=True)
    corners = [(grid.t_values[i], grid.phi0_values[j]) for i in (0, -1) for j in (0, -1)]
    noiseless = [_fidelity(T, ph) for T, ph in corners]
    below = all(F[i, j] < f0 for (i, j), f0 in zip([(0, 0), (0, -1), (-1, 0), (-1, -1)], noiseless))
    ok = nT == 0 and nP == 0 and below
    assert report("9 noise trends (mu=0.05)", ok,
                  f"{nT} decreases along T (worst {dT:.1e}), {nP} decreases along phi0 (worst {dP:.1e}); "
                  f"corner fidelities below noiseless: {below}; F range [{F.min():.3f}, {F.max():.3f}]")


def test_decay_trends(report):
    grid = ex.ROBUSTNESS_GRID
    failures = {}
    for gamma in DECAY_RATES:
        F = _sweep("sweep_decay", grid, system=SYSTEM.with_uniform_decay(gamma))
        failures[gamma] = _monotone_failures(F, 0, increasing=False)
    calibrated = SystemParams(**ex.DEFAULT_DECAY)
    F_cal = _fidelity(0.5, 0.15, calibrated, include_decay=True)
    ok = all(n == 0 for n, _ in failures.values())
    per_gamma = ", ".join(f"gamma={g}: {n} increases (worst {d:.1e})" for g, (n, d) in failures.items())
    assert report("10 decay trends (F non-increasing in T)", ok,
                  f"{per_gamma}; calibration F(T=0.5, phi0=0.15) = {F_cal:.4f} (recorded, target >= 0.95)")


def test_steady_state_oracle(report):
    rng = np.random.default_rng(11)
    residual = dark = 0.0
    for _ in range(1000):
        J1, J2 = rng.uniform(0, 100, size=2)
        g = rng.uniform(0, 1, size=3)
        p = SystemParams(J1=J1, J2=J2, Delta0=rng.uniform(1, 200), gammaL=g[0], gammaM=g[1], gammaR=g[2])
        oL, oR, oM = rng.uniform(-10, 10, size=3)
        residual = max(residual, fixed_point_residual(steady_state_amplitudes(oL, oR, oM, p), oL, oR, oM, p))
        J = rng.uniform(0.1, 100)
        q = SystemParams(J1=J, J2=J, Delta0=rng.uniform(1, 200))
        try:
            amps = steady_state_amplitudes(oL, oR, middle_drive_for_dark_cavity(q, oL, oR), q)
        except SingularSteadyStateError:
            continue
        dark = max(dark, abs(amps.alphaM))
    ok = residual <= 1e-10 and dark <= 1e-12
    assert report("11 steady-state oracle", ok,
                  f"max fixed-point residual {residual:.1e} (<= 1e-10), max |alpha_M| {dark:.1e} (<= 1e-12)")


def test_determinism(report, tmp_path):
    grid = ex.SweepGrid(np.linspace(0.3, 1.0, 4), np.linspace(0.1, 0.25, 4))
    same = {}
    for mode in ("sweep_fidelity", "sweep_noise", "sweep_kmin"):
        paths = []
        for workers in (1, 2):
            cfg = ex.ExperimentConfig(mode=mode, grid=grid, workers=workers, output=str(tmp_path / f"{mode}{workers}"))
            paths.append(ex.run_sweep(cfg).path)
        same[mode] = paths[0].read_bytes() == paths[1].read_bytes()
    ok = all(same.values())
    assert report("12 determinism (1 vs 2 workers)", ok,
                  ", ".join(f"{m}: {'identical' if s else 'DIFFERENT'}" for m, s in same.items()))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
