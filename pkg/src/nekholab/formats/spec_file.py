"""
JSON ingestion for system specs, envelope constants and run configurations.

Every document is validated strictly: unknown keys are rejected at each
nesting level and system specs must carry "version": 1.
"""

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Type, TypeVar

from ..core.envelope import EnvelopeConstants
from ..core.hamiltonian import (
    ActionWeight,
    CatalogId,
    GevreyParams,
    IntegrableSpec,
    SystemSpec,
    TrigPerturbation,
    TrigTerm,
)
from ..core.lattice import IntVector
from ..errors import ConfigError, DomainError
from ..sim.integrator import Scheme

SPEC_VERSION = 1

_SPEC_KEYS = {"version", "n", "R", "s", "gevrey", "l", "integrable", "perturbation",
              "epsilon", "m", "M", "initial_actions"}
_SPEC_REQUIRED = {"version", "n", "R", "integrable", "perturbation", "epsilon", "m", "M"}


def _check_keys(data: Any, allowed: Iterable[str], where: str,
                required: Iterable[str] = ()) -> Dict[str, Any]:
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"Unknown key(s) in {where}: {', '.join(unknown)}")
    missing = sorted(set(required) - set(data))
    if missing:
        raise ConfigError(f"Missing key(s) in {where}: {', '.join(missing)}")
    return data


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return float(value)


def _numbers(value: Any, where: str) -> List[float]:
    if not isinstance(value, list):
        raise ConfigError(f"{where} must be a list of numbers")
    return [_number(v, where) for v in value]


def _integer(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    return value


def _parse_weight(data: Any, where: str) -> ActionWeight:
    _check_keys(data, {"constant", "linear", "quadratic"}, where)
    quadratic = data.get("quadratic")
    if quadratic is not None:
        if not isinstance(quadratic, list):
            raise ConfigError(f"{where}.quadratic must be a list of rows")
        quadratic = tuple(tuple(_numbers(row, f"{where}.quadratic")) for row in quadratic)
    linear = data.get("linear")
    return ActionWeight(
        constant=_number(data.get("constant", 1.0), f"{where}.constant"),
        linear=tuple(_numbers(linear, f"{where}.linear")) if linear is not None else None,
        quadratic=quadratic,
    )


def _parse_term(data: Any, where: str) -> TrigTerm:
    _check_keys(data, {"k", "amplitude", "phase", "weight"}, where, {"k", "amplitude"})
    if not isinstance(data["k"], list):
        raise ConfigError(f"{where}.k must be a list of integers")
    k = IntVector(tuple(_integer(c, f"{where}.k") for c in data["k"]))
    weight = (_parse_weight(data["weight"], f"{where}.weight")
              if data.get("weight") is not None else ActionWeight())
    return TrigTerm(
        k=k,
        amplitude=_number(data["amplitude"], f"{where}.amplitude"),
        phase=_number(data.get("phase", 0.0), f"{where}.phase"),
        weight=weight,
    )


def parse_system_spec(data: Any) -> SystemSpec:
    """
    Build a SystemSpec from its JSON object.

    Raises:
        ConfigError: on schema violations, unsupported versions or values
            outside the domain of the system
    """
    _check_keys(data, _SPEC_KEYS, "system spec", _SPEC_REQUIRED)
    version = data["version"]
    if version != SPEC_VERSION:
        raise ConfigError(f"Unsupported spec version {version!r}; expected {SPEC_VERSION}")

    try:
        integrable = _check_keys(data["integrable"], {"catalog_id", "omega", "weights"},
                                 "integrable", {"catalog_id", "omega"})
        try:
            catalog = CatalogId(integrable["catalog_id"])
        except ValueError:
            raise ConfigError(
                f"Unknown catalog_id {integrable['catalog_id']!r}; expected one of "
                f"{', '.join(c.value for c in CatalogId)}"
            ) from None
        weights = integrable.get("weights")

        pert = _check_keys(data["perturbation"], {"terms"}, "perturbation", {"terms"})
        if not isinstance(pert["terms"], list):
            raise ConfigError("perturbation.terms must be a list")
        terms = tuple(_parse_term(t, f"perturbation.terms[{i}]")
                      for i, t in enumerate(pert["terms"]))

        gevrey = data.get("gevrey")
        if gevrey is not None:
            _check_keys(gevrey, {"alpha", "L"}, "gevrey", {"alpha", "L"})
            gevrey = GevreyParams(_number(gevrey["alpha"], "gevrey.alpha"),
                                  _number(gevrey["L"], "gevrey.L"))

        initial = data.get("initial_actions")
        return SystemSpec(
            n=_integer(data["n"], "n"),
            R=_number(data["R"], "R"),
            s=_number(data.get("s", 1.0), "s"),
            gevrey=gevrey,
            l=_number(data["l"], "l") if data.get("l") is not None else None,
            integrable=IntegrableSpec(
                catalog,
                tuple(_numbers(integrable["omega"], "integrable.omega")),
                tuple(_numbers(weights, "integrable.weights")) if weights is not None else None,
            ),
            perturbation=TrigPerturbation(terms),
            epsilon=_number(data["epsilon"], "epsilon"),
            m=_number(data["m"], "m"),
            M=_number(data["M"], "M"),
            initial_actions=tuple(_numbers(initial, "initial_actions"))
            if initial is not None else None,
        )
    except ConfigError:
        raise
    except DomainError as e:
        raise ConfigError(f"Invalid system spec: {e}") from e


def system_spec_to_dict(spec: SystemSpec) -> Dict[str, Any]:
    terms = []
    for t in spec.perturbation.terms:
        term = {"k": t.k.to_list(), "amplitude": t.amplitude, "phase": t.phase}
        if not (t.weight.is_constant and t.weight.constant == 1.0):
            term["weight"] = t.weight.to_dict()
        terms.append(term)
    integrable = {"catalog_id": spec.integrable.catalog_id.value,
                  "omega": list(spec.integrable.omega)}
    if spec.integrable.catalog_id is not CatalogId.SHIFTED_CONVEX:
        integrable["weights"] = list(spec.integrable.weights)
    return {
        "version": SPEC_VERSION,
        "n": spec.n,
        "R": spec.R,
        "s": spec.s,
        "gevrey": {"alpha": spec.gevrey.alpha, "L": spec.gevrey.L} if spec.gevrey else None,
        "l": spec.l,
        "integrable": integrable,
        "perturbation": {"terms": terms},
        "epsilon": spec.epsilon,
        "m": spec.m,
        "M": spec.M,
        "initial_actions": list(spec.initial_actions) if spec.initial_actions else None,
    }


def _read_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"File not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from None
    except OSError as e:
        raise ConfigError(f"Could not read {path}: {e}") from None


def load_system_spec(path: str) -> SystemSpec:
    return parse_system_spec(_read_json(path))


def save_system_spec(spec: SystemSpec, path: str):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(system_spec_to_dict(spec), f, indent=2)
        f.write("\n")


def parse_constants(data: Any) -> EnvelopeConstants:
    """
    Raises:
        ConfigError: on unknown keys, non-numbers or non-positive values
    """
    allowed = {f.name for f in fields(EnvelopeConstants)}
    _check_keys(data, allowed, "envelope constants")
    values = {k: _number(v, k) for k, v in data.items()}
    try:
        return EnvelopeConstants(**values)
    except DomainError as e:
        raise ConfigError(str(e)) from e


def load_constants(path: Optional[str]) -> EnvelopeConstants:
    if path is None:
        return EnvelopeConstants()
    return parse_constants(_read_json(path))


# ---------------------------------------------------------------------------
# Run configurations
# ---------------------------------------------------------------------------

@dataclass
class SimulateConfig:
    """Parameters of one `simulate` run."""

    spec: Optional[str] = None
    T: float = 100.0
    dt: float = 1e-2
    K: float = 10.0
    tol: float = 1e-6
    rho: Optional[float] = None
    scheme: str = Scheme.IMPLICIT_MIDPOINT.value
    fp_tol: float = 1e-12
    fp_max_iters: int = 50
    sample_stride: int = 10
    seed: Optional[int] = None
    out_dir: str = "out"
    allow_condition_failures: bool = False

    def validate(self):
        if not self.spec:
            raise ConfigError("simulate needs a system spec file")
        if not self.T > 0:
            raise ConfigError(f"T must be positive, got {self.T}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.K >= 1:
            raise ConfigError(f"K must be >= 1, got {self.K}")
        if not self.tol > 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.rho is not None and not self.rho > 0:
            raise ConfigError(f"rho must be positive, got {self.rho}")
        if self.scheme not in {s.value for s in Scheme}:
            raise ConfigError(f"Unknown scheme {self.scheme!r}")
        if self.sample_stride < 1:
            raise ConfigError("sample_stride must be >= 1")


@dataclass
class SweepConfig:
    """Parameters of one `sweep` or `fit` run."""

    spec: Optional[str] = None
    eps_grid: List[float] = field(default_factory=list)
    rho: float = 0.05
    T_max: float = 1e6
    seeds: List[int] = field(default_factory=lambda: [0])
    workers: Optional[int] = None
    dt: float = 1e-2
    scheme: str = Scheme.IMPLICIT_MIDPOINT.value
    K: Optional[float] = None
    out_dir: str = "out"
    synthetic: Optional[str] = None

    def validate(self):
        if self.synthetic is None:
            if not self.spec:
                raise ConfigError("sweep needs a system spec file or --synthetic")
            if not self.eps_grid:
                raise ConfigError("sweep needs a non-empty epsilon grid")
            if not self.seeds:
                raise ConfigError("sweep needs at least one seed")
        if not self.T_max > 0:
            raise ConfigError(f"T_max must be positive, got {self.T_max}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"workers must be positive, got {self.workers}")
        if self.scheme not in {s.value for s in Scheme}:
            raise ConfigError(f"Unknown scheme {self.scheme!r}")


C = TypeVar("C")


def build_run_config(cls: Type[C], config_path: Optional[str] = None,
                     **overrides: Any) -> C:
    """
    Merge a JSON config file with explicit values; explicit values that are
    not None win. The result is validated.

    Raises:
        ConfigError: on unknown keys or failed validation
    """
    allowed = {f.name for f in fields(cls)}
    values: Dict[str, Any] = {}
    if config_path:
        values.update(_check_keys(_read_json(config_path), allowed, f"{cls.__name__} file"))
    values.update({k: v for k, v in overrides.items() if v is not None})
    unknown = sorted(set(values) - allowed)
    if unknown:
        raise ConfigError(f"Unknown {cls.__name__} field(s): {', '.join(unknown)}")
    config = cls(**values)
    config.validate()
    return config


def parse_int_list(text: str, where: str = "value") -> List[int]:
    """'2,3,-1' or '2 3 -1' -> [2, 3, -1]"""
    parts = [p for p in text.replace(",", " ").split() if p]
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise ConfigError(f"{where} must be a list of integers, got {text!r}") from None


def parse_float_list(text: str, where: str = "value") -> List[float]:
    parts = [p for p in text.replace(",", " ").split() if p]
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"{where} must be a list of numbers, got {text!r}") from None


def parse_matrix(text: str, where: str = "rows") -> List[List[int]]:
    """Rows separated by ';': '2 4; 1 3' -> [[2, 4], [1, 3]]"""
    rows = [parse_int_list(row, where) for row in text.split(";") if row.strip()]
    if not rows:
        raise ConfigError(f"{where} is empty")
    return rows
