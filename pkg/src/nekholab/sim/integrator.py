"""
Symplectic integration of H(theta, I) = h(I) + epsilon f(theta, I).

The implicit midpoint rule is solved by fixed-point iteration, which
contracts as long as dt times the Lipschitz bound of the field stays below
one. The fourth-order scheme composes three midpoint substeps with the
triple-jump coefficients.
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..core.hamiltonian import TWO_PI, SystemSpec, grad_f_I, grad_f_theta
from ..errors import DomainError, IntegratorError

_CBRT2 = 2.0 ** (1.0 / 3.0)
TRIPLE_JUMP = (
    1.0 / (2.0 - _CBRT2),
    -_CBRT2 / (2.0 - _CBRT2),
    1.0 / (2.0 - _CBRT2),
)


class Scheme(Enum):
    IMPLICIT_MIDPOINT = "implicit_midpoint"
    COMPOSED4 = "composed4"


@dataclass(frozen=True)
class State:
    """Point of T^n x R^n; angles are kept in [0, 1)."""

    theta: Tuple[float, ...]
    I: Tuple[float, ...]

    def __post_init__(self):
        theta = tuple(float(x) % 1.0 for x in self.theta)
        actions = tuple(float(x) for x in self.I)
        if len(theta) != len(actions):
            raise DomainError("theta and I have different dimensions")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "I", actions)

    @classmethod
    def from_arrays(cls, theta: Sequence[float], I: Sequence[float]) -> "State":
        return cls(tuple(np.asarray(theta, dtype=float)), tuple(np.asarray(I, dtype=float)))

    @property
    def n(self) -> int:
        return len(self.I)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.theta), np.asarray(self.I)])


@dataclass(frozen=True)
class IntegratorConfig:
    scheme: Scheme = Scheme.IMPLICIT_MIDPOINT
    dt: float = 1e-2
    fp_tol: float = 1e-12
    fp_max_iters: int = 50
    sample_stride: int = 1

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt}")
        if not self.fp_tol > 0:
            raise DomainError(f"fp_tol must be positive, got {self.fp_tol}")
        if self.fp_max_iters < 1:
            raise DomainError("fp_max_iters must be at least 1")
        if self.sample_stride < 1:
            raise DomainError("sample_stride must be at least 1")

    @property
    def max_substep_factor(self) -> float:
        if self.scheme is Scheme.COMPOSED4:
            return max(abs(c) for c in TRIPLE_JUMP)
        return 1.0


class VectorField:
    """
    Canonical field X(theta, I) = (dH/dI, -dH/dtheta) of one system,
    with the trigonometric data unpacked into arrays once.
    """

    def __init__(self, spec: SystemSpec):
        self.spec = spec
        self.n = spec.n
        self.omega = np.asarray(spec.integrable.omega, dtype=float)
        self.weights = np.asarray(spec.integrable.weights, dtype=float)
        self.epsilon = float(spec.epsilon)

        pert = spec.perturbation
        self._active = self.epsilon != 0.0 and bool(pert.terms)
        self._constant_weights = pert.has_constant_weights
        if self._active and self._constant_weights:
            self._ks = np.array([t.k.components for t in pert.terms], dtype=float)
            self._phases = np.array([t.phase for t in pert.terms], dtype=float)
            self._coeffs = np.array(
                [t.amplitude * t.weight.constant for t in pert.terms], dtype=float
            )

    def __call__(self, z: np.ndarray) -> np.ndarray:
        n = self.n
        theta, actions = z[:n], z[n:]
        dtheta = self.omega + self.weights * actions
        if not self._active:
            return np.concatenate([dtheta, np.zeros(n)])

        if self._constant_weights:
            args = TWO_PI * (self._ks @ theta + self._phases)
            dI = self.epsilon * TWO_PI * (self._coeffs * np.sin(args)) @ self._ks
            return np.concatenate([dtheta, dI])

        pert = self.spec.perturbation
        dtheta = dtheta + self.epsilon * grad_f_I(pert, theta, actions)
        dI = -self.epsilon * grad_f_theta(pert, theta, actions)
        return np.concatenate([dtheta, dI])


@lru_cache(maxsize=64)
def compile_field(spec: SystemSpec) -> VectorField:
    return VectorField(spec)


def hamiltonian_vector_field(spec: SystemSpec, state: State) -> Tuple[np.ndarray, np.ndarray]:
    """
    Canonical equations: dtheta = grad h(I) + eps grad_I f, dI = -eps grad_theta f.

    Returns:
        Tuple of (dtheta, dI)
    """
    if state.n != spec.n:
        raise DomainError(f"State has dimension {state.n}, system has {spec.n}")
    out = compile_field(spec)(state.as_vector())
    return out[:spec.n], out[spec.n:]


def check_step_size(spec: SystemSpec, cfg: IntegratorConfig, dt: Optional[float] = None):
    """
    Contraction precondition |dt| * (|hess h| + eps |d^2 f|) < 1 for the
    fixed-point solve, using the largest substep of the scheme.

    Raises:
        DomainError: when the precondition fails
    """
    h = abs(cfg.dt if dt is None else dt) * cfg.max_substep_factor
    bound = spec.field_lipschitz_bound()
    if h * bound >= 1.0:
        raise DomainError(
            f"Step {h:g} too large for the fixed-point solve: "
            f"dt * Lipschitz bound = {h * bound:g} >= 1"
        )


def _midpoint(field: VectorField, z: np.ndarray, h: float,
              tol: float, max_iters: int) -> np.ndarray:
    z_next = z + h * field(z)
    residual = np.inf
    for iteration in range(1, max_iters + 1):
        z_new = z + h * field(0.5 * (z + z_next))
        residual = float(np.max(np.abs(z_new - z_next)))
        z_next = z_new
        if residual <= tol * max(1.0, float(np.max(np.abs(z_next)))):
            return z_next
    raise IntegratorError(
        "Implicit midpoint fixed-point iteration did not converge",
        diagnostics={"iterations": max_iters, "residual": residual, "dt": h},
    )


def advance(field: VectorField, z: np.ndarray, cfg: IntegratorConfig,
            dt: Optional[float] = None) -> np.ndarray:
    """One step on the flat (theta, I) vector; angles are not reduced here."""
    h = cfg.dt if dt is None else dt
    if cfg.scheme is Scheme.IMPLICIT_MIDPOINT:
        return _midpoint(field, z, h, cfg.fp_tol, cfg.fp_max_iters)
    for coeff in TRIPLE_JUMP:
        z = _midpoint(field, z, coeff * h, cfg.fp_tol, cfg.fp_max_iters)
    return z


def step(spec: SystemSpec, state: State, cfg: IntegratorConfig,
         dt: Optional[float] = None) -> State:
    """
    Advance one step of size dt (cfg.dt by default; negative runs backwards).

    Raises:
        DomainError: if the step size breaks the contraction precondition
        IntegratorError: if the fixed-point solve does not converge
    """
    if state.n != spec.n:
        raise DomainError(f"State has dimension {state.n}, system has {spec.n}")
    check_step_size(spec, cfg, dt)
    z = advance(compile_field(spec), state.as_vector(), cfg, dt)
    return State.from_arrays(z[:spec.n], z[spec.n:])


def total_energy(spec: SystemSpec, state: Union[State, np.ndarray]) -> float:
    if isinstance(state, State):
        return spec.energy(state.theta, state.I)
    return spec.energy(state[:spec.n], state[spec.n:])
