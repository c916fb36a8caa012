"""
Trajectory engine: integrates one orbit while recording action drift,
energy, and crossings of simple resonances of the frequency omega(I(t)).
"""

import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from ..certify.certificate import content_digest
from ..core.hamiltonian import SystemSpec, eval_h, grad_h, sup_bound_f
from ..core.resonance import DetectorConfig, ResonanceEvent, detect_ratio_crossing
from ..errors import DomainError, IntegratorError
from ..utils.logger import get_logger
from .integrator import IntegratorConfig, State, advance, check_step_size, compile_field

DEFAULT_ENERGY_SLACK = 1e-6


class RunStatus(Enum):
    """Status of a trajectory run."""
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    ESCAPED = "escaped"
    STOPPED = "stopped"
    CANCELLED = "cancelled"
    FAILED = "failed"


@dataclass
class TrajectoryRecord:
    """Sampled orbit with its monitors."""

    n: int
    times: List[float] = field(default_factory=list)
    thetas: List[List[float]] = field(default_factory=list)
    actions: List[List[float]] = field(default_factory=list)
    energy: List[float] = field(default_factory=list)
    drift: List[float] = field(default_factory=list)
    events: List[ResonanceEvent] = field(default_factory=list)
    status: RunStatus = RunStatus.PENDING
    escaped: bool = False
    censored: bool = False
    stop_time: Optional[float] = None
    max_drift: float = 0.0
    max_energy_error: float = 0.0
    max_h_deviation: float = 0.0
    energy_monitor_bound: float = math.inf
    steps: int = 0
    error_message: Optional[str] = None
    wall_seconds: float = 0.0

    @property
    def energy_monitor_ok(self) -> bool:
        return self.max_h_deviation <= self.energy_monitor_bound

    @property
    def first_crossing_time(self) -> Optional[float]:
        return self.events[0].time if self.events else None

    @property
    def final_time(self) -> float:
        return self.times[-1] if self.times else 0.0

    def final_state(self) -> State:
        return State.from_arrays(self.thetas[-1], self.actions[-1])

    def summary(self) -> Dict[str, Any]:
        return {
            "status": self.status.value,
            "steps": self.steps,
            "final_time": self.final_time,
            "max_drift": self.max_drift,
            "max_energy_error": self.max_energy_error,
            "max_h_deviation": self.max_h_deviation,
            "energy_monitor_bound": self.energy_monitor_bound,
            "energy_monitor_ok": self.energy_monitor_ok,
            "first_crossing_time": self.first_crossing_time,
            "crossings": len(self.events),
            "escaped": self.escaped,
            "censored": self.censored,
            "stop_time": self.stop_time,
            "error_message": self.error_message,
        }

    def to_dict(self) -> Dict[str, Any]:
        data = self.summary()
        data.update({
            "n": self.n,
            "times": list(self.times),
            "thetas": [list(t) for t in self.thetas],
            "actions": [list(a) for a in self.actions],
            "energy": list(self.energy),
            "drift": list(self.drift),
            "events": [e.to_dict() for e in self.events],
        })
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrajectoryRecord":
        return cls(
            n=int(data["n"]),
            times=list(data["times"]),
            thetas=[list(t) for t in data["thetas"]],
            actions=[list(a) for a in data["actions"]],
            energy=list(data["energy"]),
            drift=list(data["drift"]),
            events=[ResonanceEvent.from_dict(e) for e in data["events"]],
            status=RunStatus(data["status"]),
            escaped=bool(data["escaped"]),
            censored=bool(data["censored"]),
            stop_time=data.get("stop_time"),
            max_drift=float(data["max_drift"]),
            max_energy_error=float(data["max_energy_error"]),
            max_h_deviation=float(data["max_h_deviation"]),
            energy_monitor_bound=float(data["energy_monitor_bound"]),
            steps=int(data["steps"]),
            error_message=data.get("error_message"),
        )

    def digest(self) -> str:
        """Content digest; identical runs give identical digests."""
        return content_digest(self.to_dict())


def initial_phases(n: int, seed: int) -> np.ndarray:
    """Angles in [0, 1)^n from a seeded PCG64 stream."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.random(n)


class TrajectoryEngine:
    """
    Integrates orbits of one system with a fixed integrator configuration.
    Supports a progress callback and cooperative cancellation.
    """

    def __init__(self,
                 spec: SystemSpec,
                 cfg: IntegratorConfig,
                 detector: Optional[DetectorConfig] = None,
                 energy_slack: float = DEFAULT_ENERGY_SLACK,
                 progress_callback: Optional[Callable[[TrajectoryRecord, float], None]] = None,
                 progress_interval: int = 10_000):
        """
        Initialize TrajectoryEngine.

        Args:
            spec: System to integrate
            cfg: Integrator configuration
            detector: Resonance detector; None disables crossing detection
            energy_slack: Allowance for the integrator energy error in the
                energy monitor bound 2 eps sup|f| + slack
            progress_callback: Called with (record, fraction done)
            progress_interval: Steps between progress callbacks
        """
        check_step_size(spec, cfg)
        self.spec = spec
        self.cfg = cfg
        self.detector = detector
        self.energy_slack = energy_slack
        self.progress_callback = progress_callback
        self.progress_interval = max(1, progress_interval)
        self.logger = get_logger()
        self._cancelled = False

    def cancel(self):
        """Stop the current run after the step in progress."""
        self._cancelled = True

    def energy_monitor_bound(self) -> float:
        return 2.0 * self.spec.epsilon * sup_bound_f(
            self.spec.perturbation, self.spec.R
        ) + self.energy_slack

    def integrate(self, state0: State, T: float,
                  stop_drift: Optional[float] = None) -> TrajectoryRecord:
        """
        Integrate from state0 up to time T.

        The run ends early when the actions leave B(0, R) (escaped), when
        the drift reaches stop_drift (stopped) or on cancel().

        Args:
            state0: Initial state
            T: Time horizon
            stop_drift: Optional drift threshold ending the run

        Returns:
            TrajectoryRecord: Sampled orbit and monitors

        Raises:
            DomainError: for a negative horizon or mismatched dimensions
            IntegratorError: on a failed step, with the partial record attached
        """
        spec, cfg = self.spec, self.cfg
        n = spec.n
        if state0.n != n:
            raise DomainError(f"State has dimension {state0.n}, system has {n}")
        if not T >= 0:
            raise DomainError(f"Horizon T must be >= 0, got {T}")

        self._cancelled = False
        started = time.monotonic()
        I0 = np.asarray(state0.I, dtype=float)
        if float(np.max(np.abs(I0))) >= spec.R / 2:
            self.logger.warning(
                "Initial actions outside B(0, R/2)", I0=list(I0), R=spec.R
            )

        field_fn = compile_field(spec)
        integrable = spec.integrable
        z = state0.as_vector()
        h0 = eval_h(integrable, I0)
        H0 = spec.energy(z[:n], z[n:])

        record = TrajectoryRecord(n=n, status=RunStatus.RUNNING,
                                  energy_monitor_bound=self.energy_monitor_bound())
        self._sample(record, 0.0, z, H0, 0.0)

        omega_prev = grad_h(integrable, I0)
        last_k = None
        if self.detector is not None:
            last_k = self._detect(record, omega_prev, omega_prev, 0.0, 0.0, None)

        n_steps = int(math.ceil(T / cfg.dt - 1e-9)) if T > 0 else 0
        self.logger.log_run_start("trajectory", n=n, eps=spec.epsilon, T=T,
                                  dt=cfg.dt, scheme=cfg.scheme.value)

        t = 0.0
        drift = 0.0
        for i in range(1, n_steps + 1):
            if self._cancelled:
                record.status = RunStatus.CANCELLED
                break

            h_step = min(cfg.dt, T - t) if i == n_steps else cfg.dt
            try:
                z = advance(field_fn, z, cfg, h_step)
            except IntegratorError as e:
                record.status = RunStatus.FAILED
                record.error_message = str(e)
                record.wall_seconds = time.monotonic() - started
                e.diagnostics.setdefault("t", t)
                e.record = record
                self.logger.error("Step failed", **e.diagnostics)
                raise

            z[:n] %= 1.0
            t = T if i == n_steps else i * cfg.dt
            record.steps = i

            actions = z[n:]
            drift = max(drift, float(np.max(np.abs(actions - I0))))
            record.max_drift = drift
            H = spec.energy(z[:n], actions)
            record.max_energy_error = max(record.max_energy_error, abs(H - H0))
            record.max_h_deviation = max(
                record.max_h_deviation, abs(eval_h(integrable, actions) - h0)
            )

            if self.detector is not None:
                omega = grad_h(integrable, actions)
                last_k = self._detect(record, omega_prev, omega, t - h_step, t, last_k)
                omega_prev = omega

            escaped = float(np.max(np.abs(actions))) >= spec.R
            reached = stop_drift is not None and drift >= stop_drift
            if escaped or reached or i % cfg.sample_stride == 0 or i == n_steps:
                self._sample(record, t, z, H, drift)

            if escaped:
                record.escaped = True
                record.status = RunStatus.ESCAPED
                # Leaving B(0, R) ends the stability interval even below stop_drift.
                if stop_drift is not None:
                    record.stop_time = t
                self.logger.info("Actions left B(0, R)", t=t, drift=drift)
                break
            if reached:
                record.stop_time = t
                record.status = RunStatus.STOPPED
                break

            if self.progress_callback and i % self.progress_interval == 0:
                self.progress_callback(record, i / n_steps)
                self.logger.log_run_progress("trajectory", 100.0 * i / n_steps, t=t)

        if record.status is RunStatus.RUNNING:
            record.status = RunStatus.COMPLETED
        if stop_drift is not None and record.stop_time is None:
            record.censored = True

        if not record.energy_monitor_ok:
            self.logger.warning(
                "Energy monitor bound exceeded",
                deviation=record.max_h_deviation, bound=record.energy_monitor_bound,
            )

        record.wall_seconds = time.monotonic() - started
        if self.progress_callback:
            self.progress_callback(record, 1.0)
        self.logger.log_run_complete(
            "trajectory", record.wall_seconds, record.status.value,
            max_drift=record.max_drift, crossings=len(record.events),
        )
        return record

    def _sample(self, record: TrajectoryRecord, t: float, z: np.ndarray,
                H: float, drift: float):
        n = self.spec.n
        record.times.append(t)
        record.thetas.append([float(x) for x in z[:n]])
        record.actions.append([float(x) for x in z[n:]])
        record.energy.append(H)
        record.drift.append(drift)

    def _detect(self, record: TrajectoryRecord, omega_prev: np.ndarray,
                omega: np.ndarray, t_prev: float, t: float,
                last_k: Optional[Tuple[int, ...]]) -> Optional[Tuple[int, ...]]:
        """Run the detector on one step; returns the vector now detected."""
        event = detect_ratio_crossing(omega_prev, omega, self.detector, t_prev, t)
        if event is None:
            return None
        k = event.k.components
        if k != last_k:
            record.events.append(event)
            self.logger.log_event(event.time, k, event.residual, pair=event.pair)
        return k


def integrate(spec: SystemSpec, state0: State, T: float, cfg: IntegratorConfig,
              detector: Optional[DetectorConfig] = None,
              energy_slack: float = DEFAULT_ENERGY_SLACK) -> TrajectoryRecord:
    """Integrate one orbit; see TrajectoryEngine.integrate."""
    engine = TrajectoryEngine(spec, cfg, detector=detector, energy_slack=energy_slack)
    return engine.integrate(state0, T)


def measure_stability(spec: SystemSpec, state0: State, rho: float, T_max: float,
                      cfg: IntegratorConfig,
                      detector: Optional[DetectorConfig] = None) -> TrajectoryRecord:
    """
    Integrate until the drift reaches rho or T_max passes.

    Raises:
        DomainError: unless 0 < rho < R/2
    """
    if not 0 < rho < spec.R / 2:
        raise DomainError(f"rho must satisfy 0 < rho < R/2 = {spec.R / 2}, got {rho}")
    engine = TrajectoryEngine(spec, cfg, detector=detector)
    return engine.integrate(state0, T_max, stop_drift=rho)


def stability_time(spec: SystemSpec, state0: State, rho: float, T_max: float,
                   cfg: IntegratorConfig) -> Tuple[float, bool]:
    """
    First time the drift sup|I(t) - I0| reaches rho.

    Returns:
        (T, censored): (T_max, True) when the drift stays below rho
    """
    record = measure_stability(spec, state0, rho, T_max, cfg)
    if record.stop_time is not None:
        return record.stop_time, False
    return T_max, True
