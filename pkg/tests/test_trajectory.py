"""
Tests for the trajectory engine and stability-time measurement.
"""

import numpy as np
import pytest

from nekholab.core.hamiltonian import IntegrableSpec, SystemSpec, TrigPerturbation
from nekholab.core.resonance import DetectorConfig
from nekholab.errors import DomainError
from nekholab.sim.integrator import IntegratorConfig, State
from nekholab.sim.trajectory import (
    RunStatus,
    TrajectoryEngine,
    TrajectoryRecord,
    initial_phases,
    integrate,
    measure_stability,
    stability_time,
)


@pytest.fixture
def on_resonance_spec():
    """omega(0) = (1, 1/2) sits on the resonance k = (1, -2)."""
    return SystemSpec(
        n=2,
        R=1.0,
        integrable=IntegrableSpec.shifted_convex((1.0, 0.5)),
        perturbation=TrigPerturbation.cosines(((1, 0), 1.0)),
        epsilon=1e-3,
        m=0.5,
        M=3.0,
    )


@pytest.mark.unit
class TestInitialPhases:
    """Test suite for seeded initial phases."""

    def test_deterministic(self):
        a, b = initial_phases(3, 7), initial_phases(3, 7)
        assert a.tolist() == b.tolist()
        assert np.all((a >= 0) & (a < 1))

    def test_seeds_differ(self):
        assert initial_phases(3, 1).tolist() != initial_phases(3, 2).tolist()


@pytest.mark.integration
class TestTrajectoryEngine:
    """Test suite for TrajectoryEngine."""

    def test_unperturbed_run_is_exact(self, unperturbed_spec, midpoint_config):
        """epsilon = 0: no drift, no energy change, no crossings."""
        state0 = State((0.0, 0.0, 0.0), (0.1, 0.0, -0.1))
        record = integrate(unperturbed_spec, state0, 1.0, midpoint_config,
                           detector=DetectorConfig(K=10))
        assert record.status is RunStatus.COMPLETED
        assert record.max_drift == 0.0
        assert record.max_energy_error == 0.0
        assert record.max_h_deviation == 0.0
        assert record.energy_monitor_ok
        assert record.events == []
        assert record.steps == 20
        assert len(record.times) == 21
        assert record.final_time == pytest.approx(1.0)

    def test_sample_stride(self, unperturbed_spec):
        cfg = IntegratorConfig(dt=0.05, sample_stride=5)
        record = integrate(unperturbed_spec, State((0.0,) * 3, (0.0,) * 3), 1.0, cfg)
        assert record.times == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])

    def test_energy_monitor(self, pendulum_spec, midpoint_config):
        record = integrate(pendulum_spec, State((0.0, 0.0), (0.0, 0.0)), 5.0, midpoint_config)
        assert record.energy_monitor_bound == pytest.approx(2e-2 + 1e-6)
        assert record.energy_monitor_ok
        assert record.max_energy_error < 1e-3
        assert record.max_drift > 0.0

    def test_resonance_event(self, on_resonance_spec, midpoint_config):
        record = integrate(on_resonance_spec, State((0.0, 0.0), (0.0, 0.0)), 1.0,
                           midpoint_config, detector=DetectorConfig(K=4))
        assert record.first_crossing_time == 0.0
        assert record.events[0].k.components == (1, -2)

    def test_repeated_detection_is_debounced(self, on_resonance_spec, midpoint_config):
        """Consecutive steps reporting the same vector log one event."""
        record = integrate(on_resonance_spec, State((0.0, 0.0), (0.0, 0.0)), 0.2,
                           midpoint_config, detector=DetectorConfig(K=4, tol=1e-2))
        assert len(record.events) == 1

    def test_escape(self, pendulum_spec, midpoint_config):
        """The action leaves B(0, R) when R is below the oscillation size."""
        spec = SystemSpec(
            n=2, R=0.02, integrable=pendulum_spec.integrable,
            perturbation=pendulum_spec.perturbation, epsilon=1e-2, m=0.5, M=3.0,
        )
        record = integrate(spec, State((0.0, 0.0), (0.0, 0.0)), 5.0, midpoint_config)
        assert record.escaped
        assert record.status is RunStatus.ESCAPED
        assert record.final_time < 5.0

    def test_negative_horizon(self, pendulum_spec, midpoint_config):
        engine = TrajectoryEngine(pendulum_spec, midpoint_config)
        with pytest.raises(DomainError):
            engine.integrate(State((0.0, 0.0), (0.0, 0.0)), -1.0)

    def test_progress_and_cancel(self, pendulum_spec, midpoint_config):
        calls = []

        def on_progress(record, fraction):
            calls.append(fraction)
            engine.cancel()

        engine = TrajectoryEngine(pendulum_spec, midpoint_config,
                                  progress_callback=on_progress, progress_interval=5)
        record = engine.integrate(State((0.0, 0.0), (0.0, 0.0)), 1.0)
        assert record.status is RunStatus.CANCELLED
        assert record.steps == 5
        assert calls[0] == pytest.approx(0.25)
        assert calls[-1] == 1.0

    def test_identical_runs_share_digest(self, reference_spec, midpoint_config):
        state0 = State(tuple(initial_phases(3, 0)), (0.1, 0.0, -0.1))
        a = integrate(reference_spec, state0, 1.0, midpoint_config, DetectorConfig(K=6))
        b = integrate(reference_spec, state0, 1.0, midpoint_config, DetectorConfig(K=6))
        assert a.digest() == b.digest()

    def test_dict_round_trip(self, pendulum_spec, midpoint_config):
        record = integrate(pendulum_spec, State((0.0, 0.0), (0.0, 0.0)), 0.5, midpoint_config)
        again = TrajectoryRecord.from_dict(record.to_dict())
        assert again.digest() == record.digest()
        assert again.final_state().I == record.final_state().I


@pytest.mark.integration
class TestStabilityTime:
    """Test suite for drift-threshold stopping."""

    def test_small_rho_is_reached(self, pendulum_spec, midpoint_config):
        record = measure_stability(pendulum_spec, State((0.0, 0.0), (0.0, 0.0)), 0.005,
                                   50.0, midpoint_config)
        assert record.status is RunStatus.STOPPED
        assert not record.censored
        assert 0.0 < record.stop_time < 50.0
        assert record.max_drift >= 0.005

    def test_large_rho_is_censored(self, pendulum_spec, midpoint_config):
        T, censored = stability_time(pendulum_spec, State((0.0, 0.0), (0.0, 0.0)), 0.2,
                                     10.0, midpoint_config)
        assert censored
        assert T == 10.0

    def test_rho_range(self, pendulum_spec, midpoint_config):
        with pytest.raises(DomainError):
            measure_stability(pendulum_spec, State((0.0, 0.0), (0.0, 0.0)), 0.6, 10.0,
                              midpoint_config)

    def test_escape_ends_the_stability_interval(self):
        """An orbit leaving B(0, R) before reaching rho is not censored."""
        spec = SystemSpec(
            n=2, R=1.0, integrable=IntegrableSpec.shifted_convex((1.0, 0.3)),
            perturbation=TrigPerturbation.cosines(((1, 0), 1.0)),
            epsilon=0.1, m=0.5, M=3.0,
        )
        state0 = State((0.0, 0.0), (0.95, 0.0))
        cfg = IntegratorConfig(dt=0.01)

        record = measure_stability(spec, state0, 0.4, 50.0, cfg)
        assert record.status is RunStatus.ESCAPED
        assert record.max_drift < 0.4
        assert not record.censored
        assert record.stop_time == record.final_time

        T, censored = stability_time(spec, state0, 0.4, 50.0, cfg)
        assert not censored
        assert T == record.stop_time
        assert 0.0 < T < 0.5
