"""
nekholab - Resonance Geometry and Stability-Time Laboratory

Exact lattice tools for resonance modules, closed-form stability envelopes
for near-integrable Hamiltonians, and a symplectic integrator that measures
action drift and stability times on concrete systems.
"""

__version__ = "0.1.0"
__author__ = "nekholab developers"
__license__ = "MIT"

from .core import (
    DetectorConfig,
    EnvelopeConstants,
    SystemSpec,
    dirichlet_rational,
    predict_analytic,
    predict_gevrey,
    smith_normal_form,
    unimodular_completion,
)
from .errors import ConfigError, DomainError, IntegratorError, NekholabError, ResourceError
from .utils import Logger

__all__ = [
    "DetectorConfig",
    "EnvelopeConstants",
    "SystemSpec",
    "dirichlet_rational",
    "predict_analytic",
    "predict_gevrey",
    "smith_normal_form",
    "unimodular_completion",
    "ConfigError",
    "DomainError",
    "IntegratorError",
    "NekholabError",
    "ResourceError",
    "Logger",
]
