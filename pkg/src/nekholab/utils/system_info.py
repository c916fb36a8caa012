"""
Host facts for nekholab: worker-pool sizing and the host block of
self-test certificates.
"""

import os
import platform
from typing import Any, Dict, Optional

import numpy as np
import psutil

from ..errors import ConfigError

WORKERS_ENV = "NEKHOLAB_WORKERS"


class SystemInfo:
    """Detects the compute resources available to sweeps."""

    def __init__(self):
        self.system = platform.system()

    def physical_cores(self) -> int:
        """Physical core count, falling back to logical cores and then 1."""
        try:
            count = psutil.cpu_count(logical=False) or psutil.cpu_count(logical=True)
        except (OSError, RuntimeError):
            count = None
        return max(1, count or 1)

    def available_memory_bytes(self) -> Optional[int]:
        try:
            return int(psutil.virtual_memory().available)
        except (OSError, RuntimeError):
            return None

    def default_workers(self) -> int:
        """
        Worker count for sweeps: NEKHOLAB_WORKERS if set, else physical cores.

        Raises:
            ConfigError: if the environment value is not a positive integer
        """
        raw = os.environ.get(WORKERS_ENV)
        if raw is not None and raw.strip():
            try:
                value = int(raw)
            except ValueError:
                raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
            if value < 1:
                raise ConfigError(f"{WORKERS_ENV} must be positive, got {value}")
            return value
        return self.physical_cores()

    def host_facts(self) -> Dict[str, Any]:
        facts = {
            "system": self.system,
            "machine": platform.machine(),
            "python": platform.python_version(),
            "numpy": np.__version__,
            "physical_cores": self.physical_cores(),
            "logical_cores": psutil.cpu_count(logical=True) or 1,
        }
        memory = self.available_memory_bytes()
        if memory is not None:
            facts["available_memory_gb"] = round(memory / 1024 ** 3, 2)
        return facts


def default_workers() -> int:
    return SystemInfo().default_workers()
