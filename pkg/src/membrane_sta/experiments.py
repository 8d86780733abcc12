"""Single-transfer runs and (T, phi0) parameter sweeps with file output."""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import INITIAL_B1, IntegratorConfig, Trajectory, fidelity_pure, integrate_pure
from .model import SystemParams
from .noise import fidelity_density, propagate_density, pure_density
from .pulse import DEFAULT_SAMPLES, PulseParams, PulseSchedule, build_schedule, min_zeno_ratio

log = logging.getLogger(__name__)

MODES = ("transfer", "sweep_fidelity", "sweep_kmin", "sweep_noise", "sweep_decay")
SWEEP_CSV_HEADER = ("T", "phi0", "value")

#: Calibrated decay rates for the decay sweep (units of g), a calibration rather than measured values.
DEFAULT_DECAY = {"gammaL": 0.05, "gammaM": 0.05, "gammaR": 0.05, "gammaM1": 0.001, "gammaM2": 0.001}

DEFAULT_MU = 0.05
UNITS = {"rates": "g", "times": "1/g", "g_SI": "2*pi*10 kHz"}


@dataclass(frozen=True)
class SweepGrid:
    """Grid of total durations and peak angles; tau and tauC scale with T."""

    t_values: tuple
    phi0_values: tuple
    tau_ratio: float = 0.1
    tauc_ratio: float = 0.3

    def __post_init__(self):
        object.__setattr__(self, "t_values", tuple(float(x) for x in self.t_values))
        object.__setattr__(self, "phi0_values", tuple(float(x) for x in self.phi0_values))
        if not self.t_values or not self.phi0_values:
            raise ValueError("sweep grid axes must be non-empty")

    @classmethod
    def linspace(cls, t_range, phi0_range, n_t: int = 41, n_phi0: int = 41, **kw) -> "SweepGrid":
        return cls(np.linspace(*t_range, n_t), np.linspace(*phi0_range, n_phi0), **kw)

    def cells(self):
        """(T, phi0) pairs in output order: T outer, phi0 inner."""
        return [(T, ph) for T in self.t_values for ph in self.phi0_values]

    def pulse(self, T: float, phi0: float) -> PulseParams:
        return PulseParams.from_ratios(T, phi0, self.tau_ratio, self.tauc_ratio)

    @property
    def shape(self):
        return len(self.t_values), len(self.phi0_values)


# Fidelity and Zeno-ratio sweeps: a window bracketing the high-fidelity region.
FIDELITY_GRID = SweepGrid.linspace((0.1, 1.0), (0.05, 0.45))
ROBUSTNESS_GRID = SweepGrid.linspace((0.3, 1.0), (0.1, 0.25))


def default_grid(mode: str) -> SweepGrid:
    return ROBUSTNESS_GRID if mode in ("sweep_noise", "sweep_decay") else FIDELITY_GRID


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "transfer"
    system: SystemParams = field(default_factory=SystemParams)
    pulse: PulseParams | None = None
    grid: SweepGrid | None = None
    mu: float = DEFAULT_MU
    noise_prefactor: str = "printed"
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    schedule_samples: int = DEFAULT_SAMPLES
    workers: int = 1
    output: str = "out"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.mode == "transfer" and self.pulse is None:
            object.__setattr__(self, "pulse", PulseParams.from_ratios(1.0, 0.1))
        if self.mode != "transfer" and self.grid is None:
            object.__setattr__(self, "grid", default_grid(self.mode))
        if self.mu < 0:
            raise ValueError("mu must be >= 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def to_dict(self) -> dict:
        d = {
            "mode": self.mode,
            "units": UNITS,
            "system": asdict(self.system),
            "integrator": asdict(self.integrator),
            "schedule_samples": self.schedule_samples,
            "workers": self.workers,
            "output": self.output,
        }
        if self.pulse is not None:
            d["pulse"] = asdict(self.pulse)
        if self.grid is not None:
            d["grid"] = {"T": list(self.grid.t_values), "phi0": list(self.grid.phi0_values),
                         "tau_ratio": self.grid.tau_ratio, "tauc_ratio": self.grid.tauc_ratio}
        if self.mode == "sweep_noise":
            d["mu"] = self.mu
            d["noise_prefactor"] = self.noise_prefactor
        return d


def _axis(spec):
    if isinstance(spec, dict):
        return np.linspace(spec["start"], spec["stop"], int(spec["num"]))
    return spec


def config_from_dict(d: dict) -> ExperimentConfig:
    """Build a config from parsed JSON.  For ``sweep_decay`` any decay rate
    missing from ``system`` takes its calibrated default."""
    mode = d.get("mode", "transfer")
    system = dict(d.get("system", {}))
    if mode == "sweep_decay":
        for k, v in DEFAULT_DECAY.items():
            system.setdefault(k, v)
    kw = {"mode": mode, "system": SystemParams(**system)}
    if "pulse" in d:
        pd = dict(d["pulse"])
        if "tau" in pd:
            kw["pulse"] = PulseParams(**pd)
        else:
            kw["pulse"] = PulseParams.from_ratios(**pd)
    if "grid" in d:
        gd = d["grid"]
        kw["grid"] = SweepGrid(_axis(gd["T"]), _axis(gd["phi0"]),
                               gd.get("tau_ratio", 0.1), gd.get("tauc_ratio", 0.3))
    if "integrator" in d:
        kw["integrator"] = IntegratorConfig(**d["integrator"])
    for key in ("mu", "noise_prefactor", "schedule_samples", "workers", "output"):
        if key in d:
            kw[key] = d[key]
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        with path.open() as fh:
            return config_from_dict(json.load(fh))
    except (OSError, json.JSONDecodeError) as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc


def write_meta(cfg: ExperimentConfig, out_dir: Path, extra: dict | None = None) -> Path:
    meta = {"tool": "membrane_sta", "version": __version__, "config": cfg.to_dict()}
    if extra:
        meta.update(extra)
    path = out_dir / "run_meta.json"
    path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    return out


@dataclass
class TransferResult:
    schedule: PulseSchedule
    trajectory: Trajectory
    fidelity: float
    drives_path: Path | None = None
    trajectory_path: Path | None = None


def transfer(pp: PulseParams, system: SystemParams, integrator: IntegratorConfig | None = None,
             include_decay: bool = False, schedule_samples: int = DEFAULT_SAMPLES) -> TransferResult:
    """Design the drives for ``pp`` and propagate b1 -> b2 (no file output)."""
    schedule = build_schedule(pp, system, schedule_samples)
    traj = integrate_pure(INITIAL_B1, schedule, system, include_decay, integrator)
    return TransferResult(schedule, traj, fidelity_pure(traj))


def run_transfer(cfg: ExperimentConfig) -> TransferResult:
    """Write ``drives.csv``, ``trajectory.csv`` and ``run_meta.json``."""
    if cfg.mode != "transfer":
        raise ValueError(f"run_transfer needs mode 'transfer', got {cfg.mode!r}")
    result = transfer(cfg.pulse, cfg.system, cfg.integrator, cfg.system.has_decay, cfg.schedule_samples)
    out = _out_dir(cfg)
    try:
        result.drives_path = result.schedule.to_csv(out / "drives.csv")
        result.trajectory_path = result.trajectory.to_csv(out / "trajectory.csv")
        write_meta(cfg, out, {"fidelity": result.fidelity})
    except OSError as exc:
        raise OSError(f"failed writing results to {out}: {exc}") from exc
    return result


# -- per-cell evaluations (module level so worker processes can import them) --

def cell_fidelity(system: SystemParams, pp: PulseParams, integrator: IntegratorConfig) -> float:
    return transfer(pp, system.without_decay(), integrator).fidelity


def cell_kmin(system: SystemParams, pp: PulseParams, schedule_samples: int = DEFAULT_SAMPLES) -> float:
    return min_zeno_ratio(build_schedule(pp, system, schedule_samples), system)


def cell_noise(system: SystemParams, pp: PulseParams, integrator: IntegratorConfig, mu: float,
               prefactor: str = "printed") -> float:
    system = system.without_decay()
    schedule = build_schedule(pp, system)
    rho = propagate_density(pure_density(INITIAL_B1), schedule, system, mu, integrator, prefactor=prefactor)
    return fidelity_density(rho)


def cell_decay(system: SystemParams, pp: PulseParams, integrator: IntegratorConfig) -> float:
    return transfer(pp, system, integrator, include_decay=True).fidelity


def evaluate_cell(cfg: ExperimentConfig, T: float, phi0: float) -> float:
    """Value of one sweep cell; also what the sweep itself calls."""
    pp = cfg.grid.pulse(T, phi0)
    if cfg.mode == "sweep_fidelity":
        return cell_fidelity(cfg.system, pp, cfg.integrator)
    if cfg.mode == "sweep_kmin":
        return cell_kmin(cfg.system, pp, cfg.schedule_samples)
    if cfg.mode == "sweep_noise":
        return cell_noise(cfg.system, pp, cfg.integrator, cfg.mu, cfg.noise_prefactor)
    if cfg.mode == "sweep_decay":
        return cell_decay(cfg.system, pp, cfg.integrator)
    raise ValueError(f"{cfg.mode!r} is not a sweep mode")


def _safe_cell(args):
    cfg, T, phi0 = args
    try:
        return float(evaluate_cell(cfg, T, phi0))
    except Exception as exc:  # a failed cell must not abort the sweep
        log.warning("cell T=%r phi0=%r failed: %s", T, phi0, exc)
        return float("nan")


@dataclass
class SweepResult:
    grid: SweepGrid
    values: np.ndarray  # shape (len(T), len(phi0))
    path: Path | None = None

    def rows(self):
        return [(T, ph, self.values[i, j])
                for i, T in enumerate(self.grid.t_values)
                for j, ph in enumerate(self.grid.phi0_values)]


def sweep_values(cfg: ExperimentConfig) -> SweepResult:
    """Evaluate every grid cell; results are in grid order whatever the
    worker count."""
    cells = [(cfg, T, ph) for T, ph in cfg.grid.cells()]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            values = list(pool.map(_safe_cell, cells, chunksize=max(1, len(cells) // (4 * cfg.workers))))
    else:
        values = [_safe_cell(c) for c in cells]
    return SweepResult(cfg.grid, np.array(values, dtype=float).reshape(cfg.grid.shape))


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else repr(float(x))


def write_sweep_csv(result: SweepResult, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_CSV_HEADER)
        for T, ph, v in result.rows():
            writer.writerow([_fmt(T), _fmt(ph), _fmt(v)])
    return path


def read_sweep_csv(path):
    """Read a sweep CSV back as (t_values, phi0_values, values[T, phi0])."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    Ts = np.unique(data["T"])
    phis = np.unique(data["phi0"])
    return Ts, phis, data["value"].reshape(len(Ts), len(phis))


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    if cfg.mode == "transfer":
        raise ValueError("run_sweep needs a sweep mode")
    result = sweep_values(cfg)
    out = _out_dir(cfg)
    try:
        result.path = write_sweep_csv(result, out / "sweep.csv")
        write_meta(cfg, out, {"failed_cells": int(np.isnan(result.values).sum())})
    except OSError as exc:
        raise OSError(f"failed writing results to {out}: {exc}") from exc
    return result


def _require(cfg: ExperimentConfig, mode: str) -> ExperimentConfig:
    if cfg.mode != mode:
        raise ValueError(f"expected mode {mode!r}, got {cfg.mode!r}")
    return cfg


def run_sweep_fidelity(cfg: ExperimentConfig) -> SweepResult:
    return run_sweep(_require(cfg, "sweep_fidelity"))


def run_sweep_kmin(cfg: ExperimentConfig) -> SweepResult:
    return run_sweep(_require(cfg, "sweep_kmin"))


def run_sweep_noise(cfg: ExperimentConfig) -> SweepResult:
    return run_sweep(_require(cfg, "sweep_noise"))


def run_sweep_decay(cfg: ExperimentConfig) -> SweepResult:
    return run_sweep(_require(cfg, "sweep_decay"))


def with_mode(cfg: ExperimentConfig, mode: str, **changes) -> ExperimentConfig:
    """Copy of ``cfg`` switched to another mode (grid reset unless given)."""
    changes.setdefault("grid", cfg.grid if mode != "transfer" else None)
    return replace(cfg, mode=mode, **changes)
