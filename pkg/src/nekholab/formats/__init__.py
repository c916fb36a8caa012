"""System spec files, run configurations and CSV/JSON outputs."""

from .spec_file import SimulateConfig, SweepConfig, load_constants, load_system_spec
from .writers import write_sweep_csv, write_trajectory_csv

__all__ = [
    "SimulateConfig",
    "SweepConfig",
    "load_constants",
    "load_system_spec",
    "write_sweep_csv",
    "write_trajectory_csv",
]
