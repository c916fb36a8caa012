"""
Near-integrable Hamiltonians H(theta, I) = h(I) + epsilon * f(theta, I).

The integrable part comes from a small catalog of closed-form quadratic
families; the perturbation is a finite trigonometric polynomial in the
angles with optional quadratic action weights. Angles live on R^n / Z^n, so
every trigonometric argument carries the 2*pi factor.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import DomainError
from ..utils.logger import get_logger
from .lattice import IntVector, as_int_vector

TWO_PI = 2.0 * math.pi

ArrayLike = Union[Sequence[float], np.ndarray]


class CatalogId(Enum):
    """Closed-form integrable families."""

    SHIFTED_CONVEX = "shifted_convex"          # h = Omega.I + |I|^2 / 2
    ANISOTROPIC_CONVEX = "anisotropic_convex"  # h = Omega.I + sum w_i I_i^2 / 2, w > 0
    DIAGONAL_QUADRATIC = "diagonal_quadratic"  # same form, any real w


@dataclass(frozen=True)
class IntegrableSpec:
    """
    h(I) = Omega . I + 1/2 sum_i w_i I_i^2.

    shifted_convex forces w = 1; anisotropic_convex requires w > 0;
    diagonal_quadratic accepts any weights and exists for exercising the
    condition checkers with indefinite or degenerate Hessians.
    """

    catalog_id: CatalogId
    omega: Tuple[float, ...]
    weights: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        catalog = CatalogId(self.catalog_id)
        omega = tuple(float(x) for x in self.omega)
        if len(omega) < 1:
            raise DomainError("Integrable part needs a non-empty Omega")

        if catalog is CatalogId.SHIFTED_CONVEX:
            if self.weights is not None and any(float(w) != 1.0 for w in self.weights):
                raise DomainError("shifted_convex has unit weights")
            weights = (1.0,) * len(omega)
        else:
            if self.weights is None:
                raise DomainError(f"{catalog.value} needs explicit weights")
            weights = tuple(float(w) for w in self.weights)
            if len(weights) != len(omega):
                raise DomainError(
                    f"weights has length {len(weights)}, Omega has {len(omega)}"
                )
            if catalog is CatalogId.ANISOTROPIC_CONVEX and min(weights) <= 0:
                raise DomainError("anisotropic_convex weights must be positive")

        object.__setattr__(self, "catalog_id", catalog)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def shifted_convex(cls, omega: Sequence[float]) -> "IntegrableSpec":
        return cls(CatalogId.SHIFTED_CONVEX, tuple(omega))

    @classmethod
    def anisotropic_convex(cls, omega: Sequence[float],
                           weights: Sequence[float]) -> "IntegrableSpec":
        return cls(CatalogId.ANISOTROPIC_CONVEX, tuple(omega), tuple(weights))

    @classmethod
    def diagonal_quadratic(cls, omega: Sequence[float],
                           weights: Sequence[float]) -> "IntegrableSpec":
        return cls(CatalogId.DIAGONAL_QUADRATIC, tuple(omega), tuple(weights))

    @property
    def n(self) -> int:
        return len(self.omega)

    @property
    def qc_constant(self) -> float:
        """Analytic quasi-convexity constant m = min w (convex families)."""
        return min(self.weights)

    @property
    def hessian_norm(self) -> float:
        return max(abs(w) for w in self.weights)


def _vec(x: ArrayLike, n: int, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float).ravel()
    if arr.size != n:
        raise DomainError(f"{name} has dimension {arr.size}, expected {n}")
    return arr


def eval_h(spec: IntegrableSpec, I: ArrayLike) -> float:
    I = _vec(I, spec.n, "I")
    w = np.asarray(spec.weights)
    return float(np.dot(spec.omega, I) + 0.5 * np.dot(w, I * I))


def grad_h(spec: IntegrableSpec, I: ArrayLike) -> np.ndarray:
    """Frequency map omega(I) = grad h(I)."""
    I = _vec(I, spec.n, "I")
    return np.asarray(spec.omega) + np.asarray(spec.weights) * I


def hess_h(spec: IntegrableSpec, I: ArrayLike) -> np.ndarray:
    _vec(I, spec.n, "I")
    return np.diag(np.asarray(spec.weights, dtype=float))


def _nonvanishing_gradient(spec: IntegrableSpec, I: ArrayLike) -> np.ndarray:
    g = grad_h(spec, I)
    if not np.any(g):
        raise DomainError(f"grad h vanishes at I={list(np.asarray(I, dtype=float))}")
    return g


def orthogonal_complement(v: np.ndarray) -> np.ndarray:
    """Orthonormal basis (as columns) of the hyperplane orthogonal to v."""
    _, _, vt = np.linalg.svd(v.reshape(1, -1))
    return vt[1:].T


def check_qc(spec: IntegrableSpec, I: ArrayLike, m: float) -> Tuple[bool, float]:
    """
    Quasi-convexity at I: min of v^T hess(I) v over unit v orthogonal to grad h(I).

    Args:
        spec: Integrable part
        I: Action point
        m: Required constant

    Returns:
        Tuple of (margin >= m, margin)

    Raises:
        DomainError: if grad h(I) = 0 or n < 2
    """
    if spec.n < 2:
        raise DomainError("Quasi-convexity needs n >= 2")
    g = _nonvanishing_gradient(spec, I)
    basis = orthogonal_complement(g)
    projected = basis.T @ hess_h(spec, I) @ basis
    margin = float(np.linalg.eigvalsh(projected).min())
    passed = margin >= m
    get_logger().log_condition_check("QC", passed, m=m, margin=margin)
    return passed, margin


def check_derivative_bound(spec: IntegrableSpec, grid: Sequence[ArrayLike],
                           M: float) -> bool:
    """
    Condition B(M): every partial derivative of order 1 to 3 bounded by M.

    Third derivatives vanish for the quadratic catalog.

    Raises:
        DomainError: for an empty grid
    """
    points = list(grid)
    if not points:
        raise DomainError("Derivative bound needs a non-empty grid")

    second = spec.hessian_norm
    first = max(float(np.max(np.abs(grad_h(spec, I)))) for I in points)
    passed = first <= M and second <= M
    get_logger().log_condition_check(
        "B(M)", passed, M=M, max_first=first, max_second=second
    )
    return passed


def sup_norm_grid(n: int, radius: float, per_axis: int = 5) -> List[np.ndarray]:
    """Tensor grid of the sup-norm ball B(0, radius), corners included."""
    axis = np.linspace(-radius, radius, per_axis)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    return [np.array(p) for p in np.stack([m.ravel() for m in mesh], axis=1)]


@dataclass(frozen=True)
class ActionWeight:
    """Weight polynomial c + b.I + 1/2 I^T Q I multiplying a trigonometric term."""

    constant: float = 1.0
    linear: Optional[Tuple[float, ...]] = None
    quadratic: Optional[Tuple[Tuple[float, ...], ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "constant", float(self.constant))
        if self.linear is not None:
            object.__setattr__(self, "linear", tuple(float(x) for x in self.linear))
        if self.quadratic is not None:
            rows = tuple(tuple(float(x) for x in row) for row in self.quadratic)
            if any(len(row) != len(rows) for row in rows):
                raise DomainError("Quadratic weight must be a square matrix")
            object.__setattr__(self, "quadratic", rows)

    @property
    def is_constant(self) -> bool:
        return not (self.linear and any(self.linear)) and not (
            self.quadratic and any(any(row) for row in self.quadratic)
        )

    def _symmetric(self) -> Optional[np.ndarray]:
        if self.quadratic is None:
            return None
        q = np.array(self.quadratic, dtype=float)
        return 0.5 * (q + q.T)

    def value(self, I: np.ndarray) -> float:
        v = self.constant
        if self.linear is not None:
            v += float(np.dot(self.linear, I))
        q = self._symmetric()
        if q is not None:
            v += 0.5 * float(I @ q @ I)
        return v

    def gradient(self, I: np.ndarray) -> np.ndarray:
        g = np.zeros(I.size)
        if self.linear is not None:
            g += np.asarray(self.linear)
        q = self._symmetric()
        if q is not None:
            g += q @ I
        return g

    def sup_bounds(self, R: float) -> Tuple[float, float, float]:
        """Sup over B(0, R) of |w|, |grad w|_1 and sum |Q_ij|."""
        lin = np.abs(np.asarray(self.linear)) if self.linear is not None else np.zeros(1)
        q = np.abs(self._symmetric()) if self.quadratic is not None else np.zeros((1, 1))
        quad_sum = float(q.sum())
        value = abs(self.constant) + float(lin.sum()) * R + 0.5 * quad_sum * R * R
        gradient = float(lin.sum()) + quad_sum * R
        return value, gradient, quad_sum

    def to_dict(self) -> dict:
        out = {"constant": self.constant}
        if self.linear is not None:
            out["linear"] = list(self.linear)
        if self.quadratic is not None:
            out["quadratic"] = [list(row) for row in self.quadratic]
        return out


@dataclass(frozen=True)
class TrigTerm:
    """amplitude * weight(I) * cos(2 pi k.theta + 2 pi phase)."""

    k: IntVector
    amplitude: float
    phase: float = 0.0
    weight: ActionWeight = field(default_factory=ActionWeight)

    def __post_init__(self):
        object.__setattr__(self, "k", as_int_vector(self.k))
        object.__setattr__(self, "amplitude", float(self.amplitude))
        phase = float(self.phase)
        if not 0.0 <= phase < 1.0:
            raise DomainError(f"Phase must lie in [0, 1), got {phase}")
        object.__setattr__(self, "phase", phase)


@dataclass(frozen=True)
class TrigPerturbation:
    """Finite sum of trigonometric terms; k = 0 gives a constant term."""

    terms: Tuple[TrigTerm, ...] = ()

    def __post_init__(self):
        terms = tuple(self.terms)
        dims = {t.k.n for t in terms}
        if len(dims) > 1:
            raise DomainError(f"Perturbation terms mix dimensions {sorted(dims)}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def zero(cls) -> "TrigPerturbation":
        return cls(())

    @classmethod
    def cosines(cls, *pairs: Tuple[Sequence[int], float]) -> "TrigPerturbation":
        """Build from (k, amplitude) pairs with zero phase and unit weight."""
        return cls(tuple(TrigTerm(as_int_vector(k), a) for k, a in pairs))

    @property
    def n(self) -> Optional[int]:
        return self.terms[0].k.n if self.terms else None

    @property
    def has_constant_weights(self) -> bool:
        return all(t.weight.is_constant for t in self.terms)

    def _arguments(self, theta: np.ndarray) -> np.ndarray:
        ks = np.array([t.k.components for t in self.terms], dtype=float)
        phases = np.array([t.phase for t in self.terms])
        return TWO_PI * (ks @ theta + phases)


def _check_dim(pert: TrigPerturbation, theta: ArrayLike) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).ravel()
    if pert.n is not None and theta.size != pert.n:
        raise DomainError(f"theta has dimension {theta.size}, expected {pert.n}")
    return theta


def eval_f(pert: TrigPerturbation, theta: ArrayLike, I: ArrayLike) -> float:
    theta = _check_dim(pert, theta)
    if not pert.terms:
        return 0.0
    I = np.asarray(I, dtype=float).ravel()
    args = pert._arguments(theta)
    return float(sum(
        t.amplitude * t.weight.value(I) * math.cos(a)
        for t, a in zip(pert.terms, args)
    ))


def grad_f_theta(pert: TrigPerturbation, theta: ArrayLike, I: ArrayLike) -> np.ndarray:
    theta = _check_dim(pert, theta)
    out = np.zeros(theta.size)
    if not pert.terms:
        return out
    I = np.asarray(I, dtype=float).ravel()
    args = pert._arguments(theta)
    for t, a in zip(pert.terms, args):
        out -= TWO_PI * t.amplitude * t.weight.value(I) * math.sin(a) * np.asarray(
            t.k.components, dtype=float
        )
    return out


def grad_f_I(pert: TrigPerturbation, theta: ArrayLike, I: ArrayLike) -> np.ndarray:
    theta = _check_dim(pert, theta)
    I = np.asarray(I, dtype=float).ravel()
    out = np.zeros(I.size)
    if not pert.terms or pert.has_constant_weights:
        return out
    args = pert._arguments(theta)
    for t, a in zip(pert.terms, args):
        if not t.weight.is_constant:
            out += t.amplitude * math.cos(a) * t.weight.gradient(I)
    return out


def sup_bound_f(pert: TrigPerturbation, R: float = 0.0) -> float:
    """Upper bound of |f| over T^n x B(0, R)."""
    return float(sum(abs(t.amplitude) * t.weight.sup_bounds(R)[0] for t in pert.terms))


def second_derivative_bound(pert: TrigPerturbation, R: float) -> float:
    """Coarse bound on the operator norm of the full (theta, I) Hessian of f."""
    total = 0.0
    for t in pert.terms:
        value, gradient, quad = t.weight.sup_bounds(R)
        scale = TWO_PI * t.k.ell1 + 1.0
        total += abs(t.amplitude) * scale * scale * (value + gradient + quad)
    return total


def _gevrey_series(x: float, alpha: float, L: float, max_terms: int = 100_000) -> float:
    """S(x) = sum_j L^j x^j / (j!)^alpha, with a geometric tail bound."""
    if x == 0.0:
        return 1.0
    if alpha == 1.0:
        return math.exp(L * x)

    lx = L * x
    term = 1.0
    total = 1.0
    for j in range(max_terms):
        ratio = lx / (j + 1) ** alpha
        term *= ratio
        total += term
        # later ratios are smaller, so the rest is dominated geometrically
        next_ratio = lx / (j + 2) ** alpha
        if next_ratio <= 0.5 and term * next_ratio / (1.0 - next_ratio) < 1e-16 * total:
            return total + term * next_ratio / (1.0 - next_ratio)
        if not math.isfinite(total):
            break
    raise DomainError(f"Gevrey series did not converge for alpha={alpha}, L*x={lx}")


def gevrey_norm_bound(pert: TrigPerturbation, alpha: float, L: float,
                      R: Optional[float] = None) -> float:
    """
    Upper bound of the Gevrey norm |f|_{alpha, L}.

    Each term contributes |a| * W * prod_i S(2 pi |k_i|), with S the
    one-variable Gevrey series. W = |c| for constant weights; otherwise the
    coarse W = sup|w| + L sup|grad w|_1 + L^2 sum|Q_ij| over B(0, R).

    Raises:
        DomainError: for alpha < 1, L <= 0, or non-constant weights without R
    """
    if alpha < 1.0:
        raise DomainError(f"Gevrey exponent alpha must be >= 1, got {alpha}")
    if L <= 0.0:
        raise DomainError(f"Gevrey width L must be positive, got {L}")

    total = 0.0
    for t in pert.terms:
        if t.weight.is_constant:
            w_bound = abs(t.weight.constant)
        else:
            if R is None:
                raise DomainError("Action-dependent weights need the domain radius R")
            value, gradient, quad = t.weight.sup_bounds(R)
            w_bound = value + L * gradient + L * L * quad

        factor = 1.0
        for c in t.k.components:
            factor *= _gevrey_series(TWO_PI * abs(c), alpha, L)
        total += abs(t.amplitude) * w_bound * factor
    return total


@dataclass(frozen=True)
class GevreyParams:
    alpha: float
    L: float

    def __post_init__(self):
        if self.alpha < 1.0:
            raise DomainError(f"Gevrey alpha must be >= 1, got {self.alpha}")
        if self.L <= 0.0:
            raise DomainError(f"Gevrey L must be positive, got {self.L}")


@dataclass(frozen=True)
class SystemSpec:
    """
    Complete description of one near-integrable system.

    Actions live in the sup-norm ball B(0, R); initial actions are expected
    in B(0, R/2). s and l are carried for bookkeeping only.
    """

    n: int
    R: float
    integrable: IntegrableSpec
    perturbation: TrigPerturbation
    epsilon: float
    m: float
    M: float
    s: float = 1.0
    gevrey: Optional[GevreyParams] = None
    l: Optional[float] = None
    initial_actions: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"Dimension n must be >= 2, got {self.n}")
        if self.integrable.n != self.n:
            raise DomainError(
                f"Integrable part has dimension {self.integrable.n}, expected {self.n}"
            )
        if self.perturbation.n not in (None, self.n):
            raise DomainError(
                f"Perturbation has dimension {self.perturbation.n}, expected {self.n}"
            )
        if not self.R > 0:
            raise DomainError(f"Domain radius R must be positive, got {self.R}")
        if self.epsilon < 0:
            raise DomainError(f"epsilon must be >= 0, got {self.epsilon}")
        if not self.m > 0:
            raise DomainError(f"Quasi-convexity constant m must be positive, got {self.m}")
        if self.M < self.m:
            raise DomainError(f"Derivative bound M={self.M} is below m={self.m}")
        if self.initial_actions is not None:
            actions = tuple(float(x) for x in self.initial_actions)
            if len(actions) != self.n:
                raise DomainError("initial_actions has the wrong dimension")
            object.__setattr__(self, "initial_actions", actions)

    def with_epsilon(self, epsilon: float) -> "SystemSpec":
        return replace(self, epsilon=epsilon)

    def default_actions(self) -> np.ndarray:
        if self.initial_actions is not None:
            return np.array(self.initial_actions, dtype=float)
        return np.zeros(self.n)

    def energy(self, theta: ArrayLike, I: ArrayLike) -> float:
        """H(theta, I) = h(I) + epsilon f(theta, I)."""
        value = eval_h(self.integrable, I)
        if self.epsilon:
            value += self.epsilon * eval_f(self.perturbation, theta, I)
        return value

    def field_lipschitz_bound(self) -> float:
        """Bound used by the implicit-step contraction precondition."""
        return self.integrable.hessian_norm + self.epsilon * second_derivative_bound(
            self.perturbation, self.R
        )


@dataclass(frozen=True)
class IsoEnergeticPoint:
    I: Tuple[float, ...]
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "I", tuple(float(x) for x in self.I))
        if not self.lam > 0:
            raise DomainError(f"lambda must be positive, got {self.lam}")


def psi_h(spec: IntegrableSpec, p: IsoEnergeticPoint) -> Tuple[float, np.ndarray]:
    """Iso-energetic map (I, lambda) -> (h(I), lambda * omega(I))."""
    g = _nonvanishing_gradient(spec, p.I)
    return eval_h(spec, p.I), p.lam * g


def jacobian_psi(spec: IntegrableSpec, p: IsoEnergeticPoint,
                 rel_tol: float = 1e-12) -> Tuple[np.ndarray, bool]:
    """
    Jacobian of psi_h at (I, lambda) with columns (dI_1..dI_n, dlambda).

    Row 0 is (omega, 0); rows 1..n are (lambda hess h, omega).
    Non-singularity is decided on the singular values with a relative
    threshold.
    """
    g = _nonvanishing_gradient(spec, p.I)
    n = spec.n
    jac = np.zeros((n + 1, n + 1))
    jac[0, :n] = g
    jac[1:, :n] = p.lam * hess_h(spec, p.I)
    jac[1:, n] = g

    singular = np.linalg.svd(jac, compute_uv=False)
    nonsingular = bool(singular[-1] > rel_tol * singular[0])
    return jac, nonsingular
