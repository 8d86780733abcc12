"""Invariant-based pulse design for fluctuation transfer between two membranes."""

__version__ = "0.1.0"

from .model import SystemParams, build_effective_matrix, build_interaction_matrix, zeno_decompose  # noqa: E402
from .pulse import PulseParams, PulseSchedule, build_schedule, design_drives, effective_couplings  # noqa: E402
from .dynamics import IntegratorConfig, Trajectory, fidelity_pure, integrate_effective, integrate_pure  # noqa: E402
from .noise import fidelity_density, propagate_density  # noqa: E402

__all__ = [
    "SystemParams", "build_interaction_matrix", "build_effective_matrix", "zeno_decompose",
    "PulseParams", "PulseSchedule", "build_schedule", "design_drives", "effective_couplings",
    "IntegratorConfig", "Trajectory", "integrate_pure", "integrate_effective", "fidelity_pure",
    "propagate_density", "fidelity_density",
]
