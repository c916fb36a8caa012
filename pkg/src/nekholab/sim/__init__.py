"""Symplectic integration, trajectories and epsilon sweeps."""

from .integrator import IntegratorConfig, Scheme, State, step
from .sweep import SweepResult, fit_exponent, sweep, synthetic_sweep
from .trajectory import TrajectoryEngine, TrajectoryRecord, measure_stability

__all__ = [
    "IntegratorConfig",
    "Scheme",
    "State",
    "step",
    "SweepResult",
    "fit_exponent",
    "sweep",
    "synthetic_sweep",
    "TrajectoryEngine",
    "TrajectoryRecord",
    "measure_stability",
]
