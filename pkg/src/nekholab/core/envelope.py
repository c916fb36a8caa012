"""
Exponent algebra and validity thresholds of the stability estimates.

Stability for |t| <= c2 exp(c3 eps^-a) with |I(t) - I0| <= c1 eps^b. The
exponents are exact; the constants are calibration knobs that all default to
1, so every prediction carries a shape_only flag until they are overridden.
Time bounds are kept in log space since exp(eps^-a) overflows quickly.
"""

import math
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

from ..errors import DomainError
from ..utils.logger import get_logger
from .lattice import IntVector, SubmoduleBasis, lochak_bounds, module_volume

# Relative slack when a parameter typed at finite precision hits a range end.
RANGE_TOL = 1e-6


@dataclass(frozen=True)
class EnvelopeConstants:
    """Stable constants of the estimates; none are known numerically."""

    K0: float = 1.0
    eps0: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    c4: float = 1.0
    c5: float = 1.0
    c1p: float = 1.0
    c2p: float = 1.0
    c3p: float = 1.0
    c4p: float = 1.0
    c5p: float = 1.0
    rho0: float = 1.0
    C: float = 1.0
    c7: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise DomainError(f"Constant {f.name} must be a number")
            if not value > 0:
                raise DomainError(f"Constant {f.name} must be positive, got {value}")
            object.__setattr__(self, f.name, float(value))

    @property
    def calibrated(self) -> bool:
        """True once any constant differs from the unit default."""
        return any(getattr(self, f.name) != 1.0 for f in fields(self))

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


class Regularity(Enum):
    ANALYTIC = "analytic"
    GEVREY = "gevrey"


@dataclass(frozen=True)
class ThresholdCheck:
    """One validity inequality: value < limit."""

    name: str
    satisfied: bool
    value: float
    limit: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "satisfied": self.satisfied,
            "value": self.value,
            "limit": self.limit,
        }


@dataclass
class StabilityPrediction:
    """Confinement radius and log of the stability time for one parameter set."""

    regime: str
    n: int
    eps: float
    confinement_radius: float
    radius_exponent: float
    time_log_exponent: float
    log_time_bound: float
    thresholds: List[ThresholdCheck] = field(default_factory=list)
    shape_only: bool = True
    parameters: Dict[str, float] = field(default_factory=dict)
    constants: Optional[EnvelopeConstants] = None

    @property
    def all_thresholds_satisfied(self) -> bool:
        return all(t.satisfied for t in self.thresholds)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "regime": self.regime,
            "n": self.n,
            "eps": self.eps,
            "parameters": dict(self.parameters),
            "confinement_radius": self.confinement_radius,
            "radius_exponent": self.radius_exponent,
            "time_log_exponent": self.time_log_exponent,
            "log_time_bound": self.log_time_bound,
            "thresholds": [t.to_dict() for t in self.thresholds],
            "all_thresholds_satisfied": self.all_thresholds_satisfied,
            "shape_only": self.shape_only,
            "constants": self.constants.to_dict() if self.constants else None,
        }


def _require_n(n: int, minimum: int = 2):
    if not isinstance(n, int) or n < minimum:
        raise DomainError(f"Dimension n must be an integer >= {minimum}, got {n}")


def _in_range(name: str, value: float, upper: float) -> float:
    """Check 0 < value <= upper, snapping values within RANGE_TOL onto upper."""
    if not value > 0:
        raise DomainError(f"{name} must be positive, got {value}")
    if value > upper:
        if value <= upper * (1.0 + RANGE_TOL):
            return upper
        raise DomainError(f"{name}={value} exceeds the admissible maximum {upper}")
    return value


def _check_eps(eps: float, consts: EnvelopeConstants):
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    if eps > consts.eps0:
        raise DomainError(f"eps={eps} exceeds eps0={consts.eps0}")


# ---------------------------------------------------------------------------
# Parameter conversions
# ---------------------------------------------------------------------------

def analytic_gamma_bound(n: int) -> float:
    return 1.0 / (2 * n)


def analytic_delta_bound(n: int) -> float:
    return 1.0 / (2 * n * (n - 1))


def gevrey_gamma_bound(n: int) -> float:
    return 1.0 / (5 * (n - 1) ** 2)


def gevrey_delta_bound(n: int, alpha: float) -> float:
    return 1.0 / (2 * alpha * n * (n - 1))


def analytic_gamma_from_delta(n: int, delta: float) -> float:
    return delta * (n - 1)


def analytic_delta_from_gamma(n: int, gamma: float) -> float:
    return gamma / (n - 1)


def gevrey_gamma_from_delta(n: int, delta: float) -> float:
    return 2.0 * delta / (5 * (n - 1))


def gevrey_delta_from_gamma(n: int, gamma: float) -> float:
    return 2.5 * gamma * (n - 1)


# ---------------------------------------------------------------------------
# Schedules and exponents
# ---------------------------------------------------------------------------

def k_schedule(eps: float, gamma: float, consts: EnvelopeConstants = EnvelopeConstants()) -> float:
    """Order cutoff K = K0 (eps0 / eps)^gamma."""
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    _check_eps(eps, consts)
    return consts.K0 * (consts.eps0 / eps) ** gamma


def exponent_analytic(n: int, gamma: float) -> float:
    """
    a_gamma = (1 - 2 gamma) / (2 (n - 1)) for 0 < gamma <= 1/(2n).

    Lies in [1/(2n), 1/(2(n-1))).
    """
    _require_n(n)
    gamma = _in_range("gamma", gamma, analytic_gamma_bound(n))
    return (1.0 - 2.0 * gamma) / (2.0 * (n - 1))


def exponent_gevrey(n: int, alpha: float, gamma: float) -> Tuple[float, float]:
    """
    (a_gamma, b_gamma) of the Gevrey estimate for 0 < gamma <= 1/(5 (n-1)^2).

    a_gamma = (1 - 5 gamma (n-1)^2) / (2 alpha (n-1))
    b_gamma = (1 - gamma (n-1)(3n-1)) / (2 (n-1))
    """
    _require_n(n)
    if alpha < 1.0:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    gamma = _in_range("gamma", gamma, gevrey_gamma_bound(n))
    a = (1.0 - 5.0 * gamma * (n - 1) ** 2) / (2.0 * alpha * (n - 1))
    b = (1.0 - gamma * (n - 1) * (3 * n - 1)) / (2.0 * (n - 1))
    return a, b


def max_combination_holds(eps: float, gamma: float, a_gamma: float) -> bool:
    """max(eps^(2 gamma), eps^a_gamma) <= eps^gamma, used to merge radii."""
    if not 0 < eps <= 1:
        raise DomainError(f"eps must lie in (0, 1], got {eps}")
    return max(eps ** (2 * gamma), eps ** a_gamma) <= eps ** gamma * (1.0 + 1e-12)


# ---------------------------------------------------------------------------
# Thresholds
# ---------------------------------------------------------------------------

def _power_check(name: str, log_value: float, limit: float) -> ThresholdCheck:
    value = math.exp(log_value) if log_value < 700 else math.inf
    return ThresholdCheck(name, log_value < math.log(limit), value, limit)


def check_thresholds(n: int, eps: float, K: float,
                     case: Union[Regularity, str] = Regularity.ANALYTIC,
                     consts: EnvelopeConstants = EnvelopeConstants()) -> List[ThresholdCheck]:
    """
    Evaluate the validity inequalities for the order cutoff K.

    small_divisor:        eps K^(2n) < 1
    block_ratio:          K^-2 < C rho0 / 32
    energy:               eps K^2 < 16
    gevrey_small_divisor: eps K^(5 (n-1)^2) < c7   (Gevrey case only)
    """
    _require_n(n)
    if K < 1:
        raise DomainError(f"K must be >= 1, got {K}")
    if eps < 0:
        raise DomainError(f"eps must be >= 0, got {eps}")
    case = Regularity(case)

    log_k = math.log(K)
    log_eps = math.log(eps) if eps > 0 else -math.inf

    checks = [
        _power_check("small_divisor", log_eps + 2 * n * log_k, 1.0),
        ThresholdCheck("block_ratio", K ** -2 < consts.C * consts.rho0 / 32.0,
                       K ** -2, consts.C * consts.rho0 / 32.0),
        _power_check("energy", log_eps + 2 * log_k, 16.0),
    ]
    if case is Regularity.GEVREY:
        checks.append(_power_check(
            "gevrey_small_divisor", log_eps + 5 * (n - 1) ** 2 * log_k, consts.c7
        ))

    logger = get_logger()
    for check in checks:
        logger.log_condition_check(check.name, check.satisfied, value=check.value,
                                   limit=check.limit)
    return checks


# ---------------------------------------------------------------------------
# Predictions
# ---------------------------------------------------------------------------

def predict_analytic(n: int, delta: float, eps: float,
                     consts: EnvelopeConstants = EnvelopeConstants()) -> StabilityPrediction:
    """
    Analytic estimate: radius c1 eps^(delta (n-1)) for
    log|t| <= log c2 + c3 eps^-(1/(2(n-1)) - delta).

    Raises:
        DomainError: for delta outside (0, 1/(2n(n-1))] or eps outside (0, eps0]
    """
    _require_n(n)
    delta = _in_range("delta", delta, analytic_delta_bound(n))
    _check_eps(eps, consts)

    gamma = analytic_gamma_from_delta(n, delta)
    radius_exponent = delta * (n - 1)
    time_exponent = 1.0 / (2 * (n - 1)) - delta
    K = k_schedule(eps, gamma, consts)

    return StabilityPrediction(
        regime=Regularity.ANALYTIC.value,
        n=n,
        eps=eps,
        confinement_radius=consts.c1 * eps ** radius_exponent,
        radius_exponent=radius_exponent,
        time_log_exponent=time_exponent,
        log_time_bound=math.log(consts.c2) + consts.c3 * eps ** (-time_exponent),
        thresholds=check_thresholds(n, eps, K, Regularity.ANALYTIC, consts),
        shape_only=not consts.calibrated,
        parameters={"delta": delta, "gamma": gamma, "K": K,
                    "a_gamma": exponent_analytic(n, gamma)},
        constants=consts,
    )


def predict_gevrey(n: int, alpha: float, delta: float, eps: float,
                   consts: EnvelopeConstants = EnvelopeConstants()) -> StabilityPrediction:
    """
    Gevrey estimate: radius c1' eps^(2 delta / (5 (n-1))) for
    log|t| <= log c2' + c3' eps^-(1/(2 alpha (n-1)) - delta).

    Raises:
        DomainError: for alpha < 1, delta outside (0, 1/(2 alpha n (n-1))]
            or eps outside (0, eps0]
    """
    _require_n(n)
    if alpha < 1.0:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    delta = _in_range("delta", delta, gevrey_delta_bound(n, alpha))
    _check_eps(eps, consts)

    gamma = gevrey_gamma_from_delta(n, delta)
    time_exponent = 1.0 / (2 * alpha * (n - 1)) - delta
    K = k_schedule(eps, gamma, consts)
    a_gamma, b_gamma = exponent_gevrey(n, alpha, gamma)

    return StabilityPrediction(
        regime=Regularity.GEVREY.value,
        n=n,
        eps=eps,
        confinement_radius=consts.c1p * eps ** gamma,
        radius_exponent=gamma,
        time_log_exponent=time_exponent,
        log_time_bound=math.log(consts.c2p) + consts.c3p * eps ** (-time_exponent),
        thresholds=check_thresholds(n, eps, K, Regularity.GEVREY, consts),
        shape_only=not consts.calibrated,
        parameters={"alpha": alpha, "delta": delta, "gamma": gamma, "K": K,
                    "a_gamma": a_gamma, "b_gamma": b_gamma},
        constants=consts,
    )


def predict_fixed_radius(n: int, rho: float, eps: float,
                         consts: EnvelopeConstants = EnvelopeConstants(),
                         alpha: Optional[float] = None) -> StabilityPrediction:
    """
    Fixed-radius form: |I(t) - I0| <= rho for
    log|t| <= log c4 + c5 eps^(-1/(2(n-1))), or with c4', c5' and
    exponent 1/(2 alpha (n-1)) in the Gevrey case.
    """
    _require_n(n)
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    _check_eps(eps, consts)

    if alpha is None:
        regime, exponent = Regularity.ANALYTIC, 1.0 / (2 * (n - 1))
        log_time = math.log(consts.c4) + consts.c5 * eps ** (-exponent)
        params = {"rho": rho}
    else:
        if alpha < 1.0:
            raise DomainError(f"alpha must be >= 1, got {alpha}")
        regime, exponent = Regularity.GEVREY, 1.0 / (2 * alpha * (n - 1))
        log_time = math.log(consts.c4p) + consts.c5p * eps ** (-exponent)
        params = {"rho": rho, "alpha": alpha}

    return StabilityPrediction(
        regime=regime.value,
        n=n,
        eps=eps,
        confinement_radius=rho,
        radius_exponent=0.0,
        time_log_exponent=exponent,
        log_time_bound=log_time,
        shape_only=not consts.calibrated,
        parameters=params,
        constants=consts,
    )


def local_exponents(n: int, multiplicity_m: int, alpha: float = 1.0) -> Tuple[float, float]:
    """
    Exponents near a resonance of multiplicity m:
    a_m = 1/(2 alpha (n-m)), b_m = 1/(2 (n-m)).
    """
    _require_n(n, minimum=1)
    if not 0 <= multiplicity_m < n:
        raise DomainError(f"Multiplicity must satisfy 0 <= m < n, got m={multiplicity_m}")
    if alpha < 1.0:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    d = n - multiplicity_m
    return 1.0 / (2 * alpha * d), 1.0 / (2 * d)


# ---------------------------------------------------------------------------
# Envelopes in a resonant block
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockEnvelope:
    """Radius and log-time inside the block of a resonance module."""

    rank: int
    radius: float
    log_time: float
    validity: List[ThresholdCheck]

    @property
    def valid(self) -> bool:
        return all(c.satisfied for c in self.validity)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rank": self.rank,
            "radius": self.radius,
            "log_time": self.log_time,
            "validity": [c.to_dict() for c in self.validity],
            "valid": self.valid,
        }


def _basis_order(basis: SubmoduleBasis) -> int:
    return max(sum(abs(x) for x in row) for row in basis.rows)


def resonant_block_analytic(basis: SubmoduleBasis, eps: float,
                            K: Optional[float] = None) -> BlockEnvelope:
    """
    Analytic block of a rank-r module of volume |L|: radius
    (eps |L|^2)^(1/(2(n-r))), log-time (eps |L|^2)^(-1/(2(n-r))), valid
    while eps |L|^2 K^(2(n-r)) < 1.
    """
    n, r = basis.n, basis.rank
    if r >= n:
        raise DomainError("Resonant block needs rank < n")
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    K = float(K if K is not None else _basis_order(basis))
    scaled = eps * module_volume(basis) ** 2
    d = n - r
    check = _power_check("block_small_divisor",
                         math.log(scaled) + 2 * d * math.log(K), 1.0)
    return BlockEnvelope(
        rank=r,
        radius=scaled ** (1.0 / (2 * d)),
        log_time=scaled ** (-1.0 / (2 * d)),
        validity=[check],
    )


def resonant_block_gevrey(basis: SubmoduleBasis, eps: float, alpha: float,
                          c_lambda: Optional[float] = None,
                          c_lambda_prime: Optional[float] = None) -> BlockEnvelope:
    """
    Gevrey block: radius c^(3/2) c' eps^(1/(2(n-r))), log-time
    (c^(5(n-r)) eps)^(-1/(2 alpha (n-r))), valid while eps c^(5(n-r)) < 1
    and eps c^(3(n-r)) c'^(2(n-r)) < 1.

    For rank one the constants default to the factorial bounds of the
    generating vector.
    """
    n, r = basis.n, basis.rank
    if r >= n:
        raise DomainError("Resonant block needs rank < n")
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    if alpha < 1.0:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    if c_lambda is None or c_lambda_prime is None:
        if r != 1:
            raise DomainError("Constants of a rank > 1 module must be given")
        c_bound, c_prime_bound = lochak_bounds(IntVector(basis.rows[0]), n)
        c_lambda = c_lambda if c_lambda is not None else c_bound
        c_lambda_prime = c_lambda_prime if c_lambda_prime is not None else c_prime_bound

    d = n - r
    log_c, log_cp, log_eps = math.log(c_lambda), math.log(c_lambda_prime), math.log(eps)
    validity = [
        _power_check("block_gevrey_small_divisor", log_eps + 5 * d * log_c, 1.0),
        _power_check("block_gevrey_radius", log_eps + 3 * d * log_c + 2 * d * log_cp, 1.0),
    ]
    return BlockEnvelope(
        rank=r,
        radius=c_lambda ** 1.5 * c_lambda_prime * eps ** (1.0 / (2 * d)),
        log_time=math.exp(-(5 * d * log_c + log_eps) / (2 * alpha * d)),
        validity=validity,
    )


def simple_resonance_envelope(n: int, eps: float, K: float,
                              alpha: Optional[float] = None) -> BlockEnvelope:
    """
    Envelope around a simple resonance of order K.

    Analytic: radius and inverse log-time (eps K^2)^(1/(2(n-1))).
    Gevrey: radius (eps K^((n-1)(3n-1)))^(1/(2(n-1))), log-time
    (eps K^(5 (n-1)^2))^(-1/(2 alpha (n-1))).
    """
    _require_n(n)
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    if K < 1:
        raise DomainError(f"K must be >= 1, got {K}")
    d = n - 1
    log_eps, log_k = math.log(eps), math.log(K)

    if alpha is None:
        log_scaled = log_eps + 2 * log_k
        return BlockEnvelope(
            rank=1,
            radius=math.exp(log_scaled / (2 * d)),
            log_time=math.exp(-log_scaled / (2 * d)),
            validity=[_power_check("small_divisor", log_eps + 2 * n * log_k, 1.0)],
        )

    if alpha < 1.0:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    log_radius_arg = log_eps + d * (3 * n - 1) * log_k
    log_time_arg = log_eps + 5 * d * d * log_k
    return BlockEnvelope(
        rank=1,
        radius=math.exp(log_radius_arg / (2 * d)),
        log_time=math.exp(-log_time_arg / (2 * alpha * d)),
        validity=[_power_check("gevrey_small_divisor", log_time_arg, 1.0)],
    )
