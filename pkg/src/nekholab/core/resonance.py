"""
Resonance geometry in frequency space.

A frequency omega is simply resonant of order K when k . omega = 0 for some
primitive k with |k| < K. Along a path of frequencies such resonances are
found through the ratios omega_i / omega_j against the sup-attaining
component j: the ratio passing a reduced p/q means k' = q e_i - p e_j
annihilates the frequency somewhere on the step.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import DomainError, ResourceError
from .lattice import IntVector, as_int_vector

ArrayLike = Union[Sequence[float], np.ndarray]

DEFAULT_TOL = 1e-6
DEFAULT_BUDGET = 5_000_000


@dataclass(frozen=True)
class FrequencyVector:
    """A frequency omega = grad h(I)."""

    omega: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(x) for x in np.asarray(self.omega, dtype=float).ravel())
        if not values:
            raise DomainError("Frequency vector needs at least one component")
        object.__setattr__(self, "omega", values)

    @classmethod
    def of(cls, *values: float) -> "FrequencyVector":
        return cls(tuple(values))

    @property
    def n(self) -> int:
        return len(self.omega)

    @property
    def sup(self) -> float:
        return max(abs(x) for x in self.omega)

    def as_array(self) -> np.ndarray:
        return np.array(self.omega, dtype=float)


@dataclass(frozen=True)
class DetectorConfig:
    """Order cutoff K and relative tolerance for |k . omega| / (|k| |omega|)."""

    K: float
    tol: float = DEFAULT_TOL
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if not self.K >= 1:
            raise DomainError(f"Detector order K must be >= 1, got {self.K}")
        if not self.tol > 0:
            raise DomainError(f"Detector tolerance must be positive, got {self.tol}")
        if self.budget < 1:
            raise DomainError("Enumeration budget must be positive")


@dataclass(frozen=True)
class ResonanceEvent:
    """A detected simple-resonance crossing."""

    time: float
    k: IntVector
    residual: float
    pair: Tuple[int, int]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t": self.time,
            "k": self.k.to_list(),
            "residual": self.residual,
            "i": self.pair[0],
            "j": self.pair[1],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ResonanceEvent":
        return cls(
            time=float(data["t"]),
            k=IntVector(tuple(data["k"])),
            residual=float(data["residual"]),
            pair=(int(data["i"]), int(data["j"])),
        )


def _as_array(omega: Union[FrequencyVector, ArrayLike]) -> np.ndarray:
    if isinstance(omega, FrequencyVector):
        return omega.as_array()
    return np.asarray(omega, dtype=float).ravel()


def _canonical_sign(components: Sequence[int]) -> Tuple[int, ...]:
    for c in components:
        if c:
            return tuple(components) if c > 0 else tuple(-x for x in components)
    return tuple(components)


def ratio_coordinates(omega: Union[FrequencyVector, ArrayLike]) -> np.ndarray:
    """
    omega / |omega|_sup, a point of [-1, 1]^n with a unit component.

    Raises:
        DomainError: for the zero frequency
    """
    w = _as_array(omega)
    sup = np.max(np.abs(w)) if w.size else 0.0
    if sup == 0.0:
        raise DomainError("Ratio coordinates of the zero frequency")
    return w / sup


def farey_candidates(lo: float, hi: float, K: float) -> List[Fraction]:
    """Reduced p/q in [lo, hi] with q >= 1 and |p| + q < K, by denominator."""
    found = []
    if lo > hi:
        return found
    q = 1
    while q < K:
        p_min = math.ceil(lo * q)
        p_max = math.floor(hi * q)
        for p in range(p_min, p_max + 1):
            if abs(p) + q < K and math.gcd(abs(p), q) == 1:
                found.append(Fraction(p, q))
        q += 1
    return found


def _sup_indices(w: np.ndarray) -> List[int]:
    a = np.abs(w)
    return [int(i) for i in np.flatnonzero(a == a.max())]


def detect_ratio_crossing(omega_prev: Union[FrequencyVector, ArrayLike],
                          omega_curr: Union[FrequencyVector, ArrayLike],
                          cfg: DetectorConfig,
                          t_prev: float = 0.0,
                          t_curr: float = 1.0) -> Optional[ResonanceEvent]:
    """
    Look for a simple resonance of order < K on the segment between two
    consecutive frequency samples.

    For every sup-attaining index j (of either sample) and every i != j the
    ratio omega_i / omega_j is swept over the step. A reduced p/q fires when
    k' = q e_i - p e_j changes the sign of k' . omega, or when
    |k' . omega| <= tol |k'| |omega|_sup at either end. Among the firing
    rationals the one of least |p| + q wins, then least j, then least i.

    The event time interpolates the ratio linearly between t_prev and t_curr;
    the residual is |k' . omega| at the linearly interpolated frequency.

    Raises:
        DomainError: if either frequency vanishes or the shapes differ
    """
    wp, wc = _as_array(omega_prev), _as_array(omega_curr)
    if wp.shape != wc.shape:
        raise DomainError("Frequency samples have different dimensions")
    sup_p = float(np.max(np.abs(wp)))
    sup_c = float(np.max(np.abs(wc)))
    if sup_p == 0.0 or sup_c == 0.0:
        raise DomainError("Resonance detection on a vanishing frequency")

    tol = cfg.tol
    n = wp.size
    best = None

    for j in sorted(set(_sup_indices(wp)) | set(_sup_indices(wc))):
        if wp[j] == 0.0 or wc[j] == 0.0:
            continue
        for i in range(n):
            if i == j:
                continue
            rp, rc = wp[i] / wp[j], wc[i] / wc[j]
            lo, hi = min(rp, rc), max(rp, rc)
            slack = tol * (2.0 + max(abs(lo), abs(hi)))

            candidates = sorted(
                farey_candidates(lo - slack, hi + slack, cfg.K),
                key=lambda r: (abs(r.numerator) + r.denominator, r),
            )
            for ratio in candidates:
                p, q = ratio.numerator, ratio.denominator
                height = abs(p) + q
                if best is not None and (height, j, i) >= best[0]:
                    break

                gp = q * wp[i] - p * wp[j]
                gc = q * wc[i] - p * wc[j]
                if gp * gc < 0.0:
                    s = (float(ratio) - rp) / (rc - rp) if rc != rp else 0.0
                elif abs(gp) <= tol * height * sup_p:
                    s = 0.0
                elif abs(gc) <= tol * height * sup_c:
                    s = 1.0
                else:
                    continue

                s = min(1.0, max(0.0, s))
                components = [0] * n
                components[i] += q
                components[j] -= p
                w_star = wp + s * (wc - wp)
                residual = abs(float(np.dot(components, w_star)))
                event = ResonanceEvent(
                    time=t_prev + s * (t_curr - t_prev),
                    k=IntVector(_canonical_sign(components)),
                    residual=residual,
                    pair=(i, j),
                )
                best = ((height, j, i), event)

    return None if best is None else best[1]


def _l1_ball(n: int, radius: int) -> Iterator[Tuple[int, ...]]:
    if n == 1:
        for c in range(-radius, radius + 1):
            yield (c,)
        return
    for c in range(-radius, radius + 1):
        for rest in _l1_ball(n - 1, radius - abs(c)):
            yield (c,) + rest


def l1_ball_size(n: int, radius: int) -> int:
    """Number of integer points of Z^n with l1-norm <= radius."""
    return sum(
        2 ** j * math.comb(n, j) * math.comb(radius, j)
        for j in range(0, min(n, radius) + 1)
    )


@lru_cache(maxsize=32)
def _primitive_table(n: int, radius: int) -> np.ndarray:
    vectors = [
        k for k in _l1_ball(n, radius)
        if any(k) and _canonical_sign(k) == k
        and math.gcd(*(abs(c) for c in k)) == 1
    ]
    vectors.sort(key=lambda k: (sum(abs(c) for c in k), k))
    return np.array(vectors, dtype=np.int64).reshape(len(vectors), n)


def brute_force_resonant(omega: Union[FrequencyVector, ArrayLike],
                         cfg: DetectorConfig) -> Optional[IntVector]:
    """
    Exhaustive search over primitive k (up to sign) with 0 < |k| <= floor(K).

    Returns the minimizer of |k . omega| (ties: least |k|, then
    lexicographic) when its relative residual |k . omega| / (|k| |omega|_sup)
    is within tol, otherwise None.

    Raises:
        DomainError: for the zero frequency
        ResourceError: if the l1-ball exceeds cfg.budget points
    """
    w = _as_array(omega)
    sup = float(np.max(np.abs(w))) if w.size else 0.0
    if sup == 0.0:
        raise DomainError("Resonance search on the zero frequency")

    radius = int(math.floor(cfg.K))
    size = l1_ball_size(w.size, radius)
    if size > cfg.budget:
        raise ResourceError(
            f"Enumerating {size} vectors exceeds the budget of {cfg.budget}"
        )

    table = _primitive_table(w.size, radius)
    if table.shape[0] == 0:
        return None
    residuals = np.abs(table @ w)
    idx = int(np.argmin(residuals))
    best = table[idx]
    ell1 = int(np.abs(best).sum())
    if residuals[idx] <= cfg.tol * ell1 * sup:
        return IntVector(tuple(int(c) for c in best))
    return None


def resonant_distance(omega: Union[FrequencyVector, ArrayLike],
                      k: Union[IntVector, Sequence[int]]) -> float:
    """
    Euclidean distance from omega to the hyperplane k . omega = 0.

    Raises:
        DomainError: for k = 0
    """
    k = as_int_vector(k)
    if k.is_zero():
        raise DomainError("Distance to the resonance of the zero vector")
    w = _as_array(omega)
    kv = np.array(k.components, dtype=float)
    if kv.size != w.size:
        raise DomainError("Resonance vector and frequency dimensions differ")
    return abs(float(kv @ w)) / float(np.linalg.norm(kv))
