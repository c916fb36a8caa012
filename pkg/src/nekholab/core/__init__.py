"""Lattice, resonance, Hamiltonian and stability-envelope computations."""

from .envelope import (
    EnvelopeConstants,
    StabilityPrediction,
    predict_analytic,
    predict_fixed_radius,
    predict_gevrey,
)
from .hamiltonian import IntegrableSpec, SystemSpec, TrigPerturbation
from .lattice import (
    Rational,
    SmithDecomposition,
    UnimodularMatrix,
    dirichlet_rational,
    smith_normal_form,
    unimodular_completion,
)
from .resonance import DetectorConfig, ResonanceEvent, brute_force_resonant, detect_ratio_crossing

__all__ = [
    "EnvelopeConstants",
    "StabilityPrediction",
    "predict_analytic",
    "predict_fixed_radius",
    "predict_gevrey",
    "IntegrableSpec",
    "SystemSpec",
    "TrigPerturbation",
    "Rational",
    "SmithDecomposition",
    "UnimodularMatrix",
    "dirichlet_rational",
    "smith_normal_form",
    "unimodular_completion",
    "DetectorConfig",
    "ResonanceEvent",
    "brute_force_resonant",
    "detect_ratio_crossing",
]
