"""
Tests for the Hamiltonian catalog, condition checks and perturbation bounds.
"""

import math

import numpy as np
import pytest

from nekholab.core.hamiltonian import (
    TWO_PI,
    ActionWeight,
    CatalogId,
    GevreyParams,
    IntegrableSpec,
    IsoEnergeticPoint,
    SystemSpec,
    TrigPerturbation,
    TrigTerm,
    check_derivative_bound,
    check_qc,
    eval_f,
    eval_h,
    gevrey_norm_bound,
    grad_f_I,
    grad_f_theta,
    grad_h,
    hess_h,
    jacobian_psi,
    psi_h,
    sup_bound_f,
    sup_norm_grid,
)
from nekholab.errors import DomainError


@pytest.mark.unit
class TestIntegrableSpec:
    """Test suite for the integrable catalog."""

    def test_shifted_convex(self):
        spec = IntegrableSpec.shifted_convex((1.0, 2.0))
        assert spec.catalog_id is CatalogId.SHIFTED_CONVEX
        assert spec.weights == (1.0, 1.0)
        assert eval_h(spec, [1.0, -1.0]) == pytest.approx(1.0 - 2.0 + 1.0)
        assert grad_h(spec, [0.5, 0.0]).tolist() == [1.5, 2.0]

    def test_anisotropic_requires_positive_weights(self):
        with pytest.raises(DomainError):
            IntegrableSpec.anisotropic_convex((1.0, 1.0), (1.0, -1.0))

    def test_weights_length(self):
        with pytest.raises(DomainError):
            IntegrableSpec.diagonal_quadratic((1.0, 1.0), (1.0,))

    def test_qc_constant(self):
        spec = IntegrableSpec.anisotropic_convex((1.0, 1.0, 1.0), (2.0, 0.5, 3.0))
        assert spec.qc_constant == 0.5
        assert spec.hessian_norm == 3.0


def _random_spec(catalog: CatalogId, rng: np.random.Generator, n: int) -> IntegrableSpec:
    omega = tuple(rng.uniform(-2.0, 2.0, n))
    if catalog is CatalogId.SHIFTED_CONVEX:
        return IntegrableSpec.shifted_convex(omega)
    if catalog is CatalogId.ANISOTROPIC_CONVEX:
        return IntegrableSpec.anisotropic_convex(omega, tuple(rng.uniform(0.5, 2.0, n)))
    return IntegrableSpec.diagonal_quadratic(omega, tuple(rng.uniform(-2.0, 2.0, n)))


@pytest.mark.unit
class TestDerivatives:
    """grad h and hess h against central differences."""

    STEP = 1e-5

    @pytest.mark.parametrize("catalog", list(CatalogId))
    def test_gradient_matches_differences(self, catalog):
        rng = np.random.Generator(np.random.PCG64(11))
        for _ in range(100):
            n = int(rng.integers(2, 5))
            spec = _random_spec(catalog, rng, n)
            I = rng.uniform(-1.0, 1.0, n)
            steps = np.eye(n) * self.STEP
            numeric = [(eval_h(spec, I + e) - eval_h(spec, I - e)) / (2 * self.STEP)
                       for e in steps]
            np.testing.assert_allclose(grad_h(spec, I), numeric, atol=1e-7)

    @pytest.mark.parametrize("catalog", list(CatalogId))
    def test_hessian_matches_differences(self, catalog):
        rng = np.random.Generator(np.random.PCG64(12))
        for _ in range(100):
            n = int(rng.integers(2, 5))
            spec = _random_spec(catalog, rng, n)
            I = rng.uniform(-1.0, 1.0, n)
            steps = np.eye(n) * self.STEP
            numeric = np.column_stack([
                (grad_h(spec, I + e) - grad_h(spec, I - e)) / (2 * self.STEP) for e in steps
            ])
            np.testing.assert_allclose(hess_h(spec, I), numeric, atol=1e-7)


@pytest.mark.unit
class TestConditions:
    """Test suite for the quasi-convexity and derivative-bound checks."""

    def test_convex_passes(self):
        spec = IntegrableSpec.shifted_convex((1.0, 1.4, 1.7))
        passed, margin = check_qc(spec, [0.0, 0.0, 0.0], 0.5)
        assert passed
        assert margin == pytest.approx(1.0)

    def test_degenerate_fails(self):
        """Hessian diag(1, -1) vanishes on the complement of (1, 1)."""
        spec = IntegrableSpec.diagonal_quadratic((1.0, 1.0), (1.0, -1.0))
        passed, margin = check_qc(spec, [0.0, 0.0], 0.1)
        assert not passed
        assert margin == pytest.approx(0.0, abs=1e-12)

    def test_indefinite_fails(self):
        spec = IntegrableSpec.diagonal_quadratic((1.0, 1.0), (1.0, -3.0))
        passed, margin = check_qc(spec, [0.0, 0.0], 0.1)
        assert not passed
        assert margin == pytest.approx(-1.0)

    def test_shifted_convex_margin_is_one(self):
        rng = np.random.Generator(np.random.PCG64(21))
        for _ in range(100):
            n = int(rng.integers(2, 6))
            spec = IntegrableSpec.shifted_convex(tuple(rng.uniform(0.5, 2.0, n)))
            _, margin = check_qc(spec, rng.uniform(-0.4, 0.4, n), 0.5)
            assert margin == pytest.approx(spec.qc_constant, abs=1e-10)

    def test_repeated_smallest_weight_attains_min(self):
        """With the least weight repeated, the complement of grad h meets its eigenspace."""
        spec = IntegrableSpec.anisotropic_convex((1.0, 1.3, 0.7), (0.5, 0.5, 2.0))
        rng = np.random.Generator(np.random.PCG64(22))
        for _ in range(100):
            passed, margin = check_qc(spec, rng.uniform(-0.3, 0.3, 3), spec.qc_constant - 1e-10)
            assert passed
            assert margin == pytest.approx(0.5, abs=1e-10)

    def test_anisotropic_margin_interlaces(self):
        """min w <= margin <= second least w, so min w is a valid QC constant."""
        rng = np.random.Generator(np.random.PCG64(23))
        for _ in range(100):
            n = int(rng.integers(2, 6))
            weights = rng.uniform(0.2, 3.0, n)
            spec = IntegrableSpec.anisotropic_convex(tuple(rng.uniform(0.5, 2.0, n)),
                                                     tuple(weights))
            passed, margin = check_qc(spec, rng.uniform(-0.1, 0.1, n),
                                      spec.qc_constant - 1e-10)
            low, second = np.sort(weights)[:2]
            assert passed
            assert low - 1e-10 <= margin <= second + 1e-10

    def test_gradient_along_softest_axis(self):
        spec = IntegrableSpec.anisotropic_convex((1.0, 0.0, 0.0), (0.5, 1.0, 2.0))
        _, margin = check_qc(spec, [0.0, 0.0, 0.0], 0.5)
        assert margin == pytest.approx(1.0)

    def test_vanishing_gradient(self):
        spec = IntegrableSpec.shifted_convex((1.0, 1.0))
        with pytest.raises(DomainError):
            check_qc(spec, [-1.0, -1.0], 0.5)

    def test_derivative_bound(self):
        spec = IntegrableSpec.shifted_convex((1.0, 1.0))
        grid = sup_norm_grid(2, 1.0)
        assert len(grid) == 25
        assert check_derivative_bound(spec, grid, 2.0)
        assert not check_derivative_bound(spec, grid, 1.5)

    def test_derivative_bound_empty_grid(self):
        spec = IntegrableSpec.shifted_convex((1.0, 1.0))
        with pytest.raises(DomainError):
            check_derivative_bound(spec, [], 2.0)


@pytest.mark.unit
class TestIsoEnergetic:
    """Test suite for the iso-energetic map."""

    def test_psi(self):
        spec = IntegrableSpec.shifted_convex((1.0, 2.0))
        energy, vec = psi_h(spec, IsoEnergeticPoint((0.0, 0.0), 2.0))
        assert energy == 0.0
        assert vec.tolist() == [2.0, 4.0]

    def test_convex_jacobian_nonsingular(self):
        spec = IntegrableSpec.shifted_convex((1.0, 2.0))
        jac, nonsingular = jacobian_psi(spec, IsoEnergeticPoint((0.0, 0.0), 1.0))
        assert nonsingular
        assert np.linalg.det(jac) == pytest.approx(-5.0)

    def test_flat_jacobian_singular(self):
        spec = IntegrableSpec.diagonal_quadratic((1.0, 2.0), (0.0, 0.0))
        _, nonsingular = jacobian_psi(spec, IsoEnergeticPoint((0.0, 0.0), 1.0))
        assert not nonsingular

    def test_lambda_positive(self):
        with pytest.raises(DomainError):
            IsoEnergeticPoint((0.0, 0.0), 0.0)


@pytest.mark.unit
class TestPerturbation:
    """Test suite for trigonometric perturbations."""

    def test_eval_and_gradient(self):
        pert = TrigPerturbation.cosines(((1, -1), 2.0))
        theta, I = np.array([0.25, 0.0]), np.zeros(2)
        assert eval_f(pert, theta, I) == pytest.approx(0.0, abs=1e-12)
        grad = grad_f_theta(pert, theta, I)
        assert grad.tolist() == pytest.approx([-2.0 * TWO_PI, 2.0 * TWO_PI])

    def test_gradient_matches_finite_difference(self):
        pert = TrigPerturbation((
            TrigTerm((1, 2), 0.7, phase=0.3),
            TrigTerm((0, 1), -0.4, weight=ActionWeight(1.0, (0.5, -0.2))),
        ))
        theta, I = np.array([0.13, 0.71]), np.array([0.2, -0.1])
        h = 1e-6
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            fd_theta = (eval_f(pert, theta + e, I) - eval_f(pert, theta - e, I)) / (2 * h)
            fd_I = (eval_f(pert, theta, I + e) - eval_f(pert, theta, I - e)) / (2 * h)
            assert grad_f_theta(pert, theta, I)[i] == pytest.approx(fd_theta, rel=1e-6)
            assert grad_f_I(pert, theta, I)[i] == pytest.approx(fd_I, rel=1e-6, abs=1e-9)

    def test_phase_range(self):
        with pytest.raises(DomainError):
            TrigTerm((1, 0), 1.0, phase=1.0)

    def test_mixed_dimensions(self):
        with pytest.raises(DomainError):
            TrigPerturbation((TrigTerm((1, 0), 1.0), TrigTerm((1, 0, 0), 1.0)))

    def test_sup_bound(self):
        pert = TrigPerturbation((
            TrigTerm((1, 0), 2.0),
            TrigTerm((0, 1), -1.0, weight=ActionWeight(1.0, (1.0, 0.0))),
        ))
        assert sup_bound_f(pert, 0.5) == pytest.approx(2.0 + 1.5)

    def test_zero_perturbation(self):
        pert = TrigPerturbation.zero()
        assert eval_f(pert, [0.1, 0.2], [0.0, 0.0]) == 0.0
        assert sup_bound_f(pert) == 0.0


@pytest.mark.unit
class TestGevreyNorm:
    """Test suite for the Gevrey norm bound."""

    def test_analytic_limit(self):
        """alpha = 1 gives exp(2 pi L |k_i|) per component."""
        pert = TrigPerturbation.cosines(((1, 0), 3.0))
        assert gevrey_norm_bound(pert, 1.0, 0.1) == pytest.approx(3.0 * math.exp(TWO_PI * 0.1))

    def test_series_alpha_two(self):
        """sum x^j / (j!)^2 is the Bessel value I0(2 sqrt(x))."""
        pert = TrigPerturbation.cosines(((1, 0), 1.0))
        expected = float(np.i0(2.0 * math.sqrt(TWO_PI)))
        assert gevrey_norm_bound(pert, 2.0, 1.0) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0])
    def test_monotone_in_width(self, alpha):
        pert = TrigPerturbation.cosines(((1, -1, 0), 0.5), ((0, 1, -2), -0.3), ((2, 0, 1), 0.2))
        widths = np.linspace(0.05, 2.0, 40)
        bounds = [gevrey_norm_bound(pert, alpha, float(L)) for L in widths]
        assert all(b2 > b1 for b1, b2 in zip(bounds, bounds[1:]))

    def test_monotone_in_width_with_action_weights(self):
        weight = ActionWeight(1.0, (0.5, -0.25), ((0.1, 0.0), (0.0, 0.2)))
        pert = TrigPerturbation((TrigTerm((1, 1), 0.4, weight=weight),
                                 TrigTerm((0, 1), 0.6)))
        bounds = [gevrey_norm_bound(pert, 2.0, float(L), R=1.0) for L in (0.1, 0.5, 1.0, 1.5)]
        assert bounds == sorted(bounds)
        assert bounds[-1] > bounds[0]

    @pytest.mark.parametrize("index", [0, 1, 2])
    def test_monotone_in_amplitudes(self, index):
        rng = np.random.Generator(np.random.PCG64(31 + index))
        ks = ((1, -1, 0), (0, 1, -2), (2, 0, 1))
        amps = [0.5, -0.3, 0.2]
        previous = None
        for magnitude in np.sort(rng.uniform(0.0, 2.0, 10)):
            amps[index] = math.copysign(float(magnitude), amps[index])
            pert = TrigPerturbation.cosines(*zip(ks, amps))
            bound = gevrey_norm_bound(pert, 1.5, 0.3)
            if previous is not None:
                assert bound >= previous
            previous = bound

    def test_invalid_alpha(self):
        with pytest.raises(DomainError):
            gevrey_norm_bound(TrigPerturbation.zero(), 0.5, 1.0)

    def test_weighted_terms_need_radius(self):
        pert = TrigPerturbation((TrigTerm((1, 0), 1.0, weight=ActionWeight(1.0, (1.0, 0.0))),))
        with pytest.raises(DomainError):
            gevrey_norm_bound(pert, 1.0, 1.0)
        assert gevrey_norm_bound(pert, 1.0, 1.0, R=1.0) > 0

    def test_params(self):
        with pytest.raises(DomainError):
            GevreyParams(1.0, 0.0)


@pytest.mark.unit
class TestSystemSpec:
    """Test suite for SystemSpec validation."""

    def test_reference(self, reference_spec):
        assert reference_spec.n == 3
        assert reference_spec.default_actions().tolist() == [0.1, 0.0, -0.1]

    def test_with_epsilon(self, reference_spec):
        spec = reference_spec.with_epsilon(0.0)
        assert spec.epsilon == 0.0
        assert spec.energy([0.1, 0.2, 0.3], [0.0, 0.0, 0.0]) == 0.0

    @pytest.mark.parametrize("field,value", [
        ("n", 1), ("R", 0.0), ("epsilon", -1.0), ("m", 0.0), ("M", 0.1),
    ])
    def test_invalid(self, reference_spec, field, value):
        kwargs = dict(
            n=3, R=1.0, integrable=reference_spec.integrable,
            perturbation=reference_spec.perturbation, epsilon=1e-3, m=0.5, M=3.0,
        )
        kwargs[field] = value
        with pytest.raises(DomainError):
            SystemSpec(**kwargs)
