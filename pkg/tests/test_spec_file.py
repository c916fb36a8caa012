"""
Tests for JSON ingestion of specs, constants and run configurations.
"""

import json
from dataclasses import replace
from pathlib import Path

import pytest

from nekholab.core.envelope import EnvelopeConstants
from nekholab.core.hamiltonian import CatalogId, IntegrableSpec, sup_bound_f
from nekholab.errors import ConfigError
from nekholab.formats.spec_file import (
    SimulateConfig,
    SweepConfig,
    build_run_config,
    load_constants,
    load_system_spec,
    parse_constants,
    parse_float_list,
    parse_int_list,
    parse_matrix,
    parse_system_spec,
    save_system_spec,
    system_spec_to_dict,
)


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


@pytest.fixture
def spec_data(reference_spec_path):
    with open(reference_spec_path, encoding="utf-8") as f:
        return json.load(f)


@pytest.mark.unit
class TestSystemSpecFile:
    """Test suite for system spec files."""

    def test_reference_file(self, reference_spec_path, reference_spec):
        assert load_system_spec(reference_spec_path) == reference_spec

    def test_reference_perturbation_is_normalized(self, reference_spec_path):
        """sup |f| <= 1 on B(0, R), so eps alone sizes the perturbation."""
        spec = load_system_spec(reference_spec_path)
        assert sup_bound_f(spec.perturbation, spec.R) <= 1.0 + 1e-12

    def test_save_and_load(self, tmp_path, pendulum_spec):
        path = str(tmp_path / "nested" / "spec.json")
        save_system_spec(pendulum_spec, path)
        assert load_system_spec(path) == pendulum_spec

    def test_weights_kept_for_other_catalogs(self, pendulum_spec):
        spec = replace(pendulum_spec, integrable=IntegrableSpec.anisotropic_convex(
            (1.0, 2.0), (0.5, 2.0)))
        data = system_spec_to_dict(spec)
        assert data["integrable"]["weights"] == [0.5, 2.0]
        assert parse_system_spec(data).integrable.catalog_id is CatalogId.ANISOTROPIC_CONVEX

    def test_unknown_top_level_key(self, spec_data):
        spec_data["colour"] = "blue"
        with pytest.raises(ConfigError, match="colour"):
            parse_system_spec(spec_data)

    def test_unknown_nested_key(self, spec_data):
        spec_data["perturbation"]["terms"][0]["sign"] = 1
        with pytest.raises(ConfigError, match="sign"):
            parse_system_spec(spec_data)

    def test_missing_key(self, spec_data):
        del spec_data["epsilon"]
        with pytest.raises(ConfigError, match="epsilon"):
            parse_system_spec(spec_data)

    def test_version(self, spec_data):
        spec_data["version"] = 2
        with pytest.raises(ConfigError, match="version"):
            parse_system_spec(spec_data)

    def test_unknown_catalog(self, spec_data):
        spec_data["integrable"]["catalog_id"] = "kepler"
        with pytest.raises(ConfigError, match="catalog_id"):
            parse_system_spec(spec_data)

    def test_non_integer_wave_vector(self, spec_data):
        spec_data["perturbation"]["terms"][0]["k"] = [1.5, -1, 0]
        with pytest.raises(ConfigError):
            parse_system_spec(spec_data)

    def test_domain_errors_become_config_errors(self, spec_data):
        spec_data["M"] = 0.1
        with pytest.raises(ConfigError, match="Invalid system spec"):
            parse_system_spec(spec_data)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_system_spec(str(tmp_path / "absent.json"))

    def test_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_system_spec(str(path))


@pytest.mark.unit
class TestConstants:
    """Test suite for envelope constants files."""

    def test_defaults(self):
        assert load_constants(None) == EnvelopeConstants()

    def test_partial(self, tmp_path):
        consts = load_constants(_write(tmp_path, "c.json", {"c1": 2.0, "K0": 3}))
        assert consts.c1 == 2.0
        assert consts.K0 == 3.0

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            parse_constants({"c9": 1.0})

    def test_non_positive(self):
        with pytest.raises(ConfigError):
            parse_constants({"c1": -1.0})


@pytest.mark.unit
class TestRunConfig:
    """Test suite for run configuration merging."""

    def test_overrides_win(self, tmp_path):
        path = _write(tmp_path, "sim.json", {"spec": "a.json", "T": 5.0, "dt": 0.1})
        cfg = build_run_config(SimulateConfig, path, T=2.0, dt=None)
        assert cfg.spec == "a.json"
        assert cfg.T == 2.0
        assert cfg.dt == 0.1

    def test_unknown_file_key(self, tmp_path):
        path = _write(tmp_path, "sim.json", {"spec": "a.json", "steps": 5})
        with pytest.raises(ConfigError, match="steps"):
            build_run_config(SimulateConfig, path)

    def test_validation(self):
        with pytest.raises(ConfigError):
            build_run_config(SimulateConfig, spec="a.json", T=-1.0)
        with pytest.raises(ConfigError):
            build_run_config(SimulateConfig, spec="a.json", scheme="euler")
        with pytest.raises(ConfigError):
            build_run_config(SimulateConfig)

    def test_shipped_sweep_config(self):
        path = Path(__file__).parent.parent / "configs" / "sweep_n3.json"
        cfg = build_run_config(SweepConfig, str(path))
        assert cfg.eps_grid == [0.05, 0.03, 0.02, 0.015, 0.01]
        assert cfg.seeds == [0, 1, 2]

    def test_synthetic_needs_no_spec(self):
        cfg = build_run_config(SweepConfig, synthetic="a=0.25")
        assert cfg.spec is None


@pytest.mark.unit
class TestListParsing:
    """Test suite for command-line list parsing."""

    def test_int_list(self):
        assert parse_int_list("2,3,-1") == [2, 3, -1]
        assert parse_int_list("2 3 -1") == [2, 3, -1]
        with pytest.raises(ConfigError):
            parse_int_list("2,x")

    def test_float_list(self):
        assert parse_float_list("1e-2, 5e-3") == [0.01, 0.005]

    def test_matrix(self):
        assert parse_matrix("2 4; 1 3") == [[2, 4], [1, 3]]
        with pytest.raises(ConfigError):
            parse_matrix(" ; ")
