"""
Pytest configuration and fixtures for nekholab tests.
"""

import sys
from pathlib import Path

# Add the src directory to Python path
project_root = Path(__file__).parent.parent
src_path = project_root / "src"
sys.path.insert(0, str(src_path))

# Common test fixtures
import pytest

from nekholab.core.hamiltonian import (
    IntegrableSpec,
    SystemSpec,
    TrigPerturbation,
    TrigTerm,
)
from nekholab.sim.integrator import IntegratorConfig
from nekholab.utils import logger as logger_module

REFERENCE_SPEC = project_root / "configs" / "reference_n3.json"

SQRT2 = 1.4142135623730951
SQRT3 = 1.7320508075688772


@pytest.fixture
def reference_spec_path():
    """Path of the shipped three-degree-of-freedom reference system."""
    return str(REFERENCE_SPEC)


@pytest.fixture
def reference_spec():
    """The reference system built in Python (same data as the JSON file)."""
    return SystemSpec(
        n=3,
        R=1.0,
        integrable=IntegrableSpec.shifted_convex((1.0, SQRT2, SQRT3)),
        perturbation=TrigPerturbation((
            TrigTerm((1, -1, 0), 0.5),
            TrigTerm((0, 1, -1), 0.3, phase=0.25),
            TrigTerm((1, 1, -2), 0.2, phase=0.1),
        )),
        epsilon=1e-3,
        m=0.5,
        M=3.0,
        initial_actions=(0.1, 0.0, -0.1),
    )


@pytest.fixture
def pendulum_spec():
    """Two degrees of freedom with a single resonant harmonic."""
    return SystemSpec(
        n=2,
        R=1.0,
        integrable=IntegrableSpec.shifted_convex((1.0, SQRT2)),
        perturbation=TrigPerturbation.cosines(((1, -1), 1.0)),
        epsilon=1e-2,
        m=0.5,
        M=3.0,
    )


@pytest.fixture
def unperturbed_spec(reference_spec):
    """Reference system with epsilon = 0."""
    return reference_spec.with_epsilon(0.0)


@pytest.fixture
def midpoint_config():
    return IntegratorConfig(dt=0.05)


@pytest.fixture
def out_dir(tmp_path):
    """Directory for run outputs."""
    path = tmp_path / "out"
    path.mkdir()
    return path


@pytest.fixture(autouse=True)
def fresh_logger():
    """Each test gets a default logger bound to its own captured stderr."""
    logger_module._default_logger = None
    yield
    logger_module._default_logger = None
