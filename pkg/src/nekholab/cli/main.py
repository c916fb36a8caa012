"""
Command Line Interface for nekholab.

Results are JSON on stdout; logs go to stderr. Exit codes: 0 success,
1 self-test failure, 2 usage, config or domain error, 3 integrator
failure or interrupt.
"""

import functools
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional

import click

from .. import __version__
from ..certify.certificate import CertificateGenerator
from ..certify.selftest import SUITES, run_selftest
from ..core import envelope, lattice, resonance
from ..core.hamiltonian import check_derivative_bound, check_qc, sup_norm_grid
from ..errors import ConfigError, DomainError, IntegratorError, ResourceError
from ..formats.spec_file import (
    SimulateConfig,
    SweepConfig,
    build_run_config,
    load_constants,
    load_system_spec,
    parse_float_list,
    parse_int_list,
    parse_matrix,
)
from ..formats.writers import (
    read_csv,
    write_events_json,
    write_json,
    write_sweep_csv,
    write_trajectory_csv,
)
from ..sim.integrator import IntegratorConfig, Scheme, State
from ..sim.sweep import (
    RowStatus,
    SweepResult,
    SweepRow,
    fit_exponent,
    parse_synthetic,
    summarize,
    sweep as run_sweep,
    synthetic_sweep,
    validate_eps_grid,
)
from ..sim.trajectory import TrajectoryEngine, initial_phases
from ..utils.logger import get_logger, setup_logging
from ..utils.system_info import SystemInfo

EXIT_OK = 0
EXIT_SELFTEST_FAILED = 1
EXIT_DOMAIN = 2
EXIT_RUNTIME = 3


def _emit(payload: Dict[str, Any]):
    click.echo(json.dumps(payload, indent=2))


def _fail(kind: str, reason: str, code: int):
    click.echo(json.dumps({"error": kind, "reason": reason}), err=True)
    sys.exit(code)


def handle_errors(func):
    """Map nekholab errors onto exit codes with a one-line JSON reason."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except IntegratorError as e:
            _fail("integrator", str(e), EXIT_RUNTIME)
        except ConfigError as e:
            _fail("config", str(e), EXIT_DOMAIN)
        except DomainError as e:
            _fail("domain", str(e), EXIT_DOMAIN)
        except ResourceError as e:
            _fail("resource", str(e), EXIT_DOMAIN)
        except KeyboardInterrupt:
            _fail("interrupted", "interrupted by user", EXIT_RUNTIME)

    return wrapper


@click.group()
@click.version_option(version=__version__, prog_name="nekholab")
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]),
              default=None, help="Logging level (default: WARNING, or NEKHOLAB_LOG_LEVEL)")
@click.option("--log-file", type=click.Path(), default=None, help="Rotating log file")
def cli(log_level, log_file):
    """nekholab - resonance geometry and stability-time laboratory."""
    if log_level or log_file:
        setup_logging(log_level=log_level or "WARNING", log_file=log_file)


# ---------------------------------------------------------------------------
# lattice
# ---------------------------------------------------------------------------

@cli.group("lattice")
def lattice_group():
    """Exact lattice operations with embedded verification."""


@lattice_group.command("complete")
@click.option("--k", "k_text", required=True, help="Primitive vector, e.g. 2,3")
@handle_errors
def lattice_complete(k_text):
    """Complete a primitive vector into a unimodular matrix."""
    k = parse_int_list(k_text, "--k")
    a = lattice.unimodular_completion(k)
    rows = a.to_lists()
    inverse = lattice.inverse_unimodular(a)
    n, norm = len(k), sum(abs(c) for c in k)
    row_norms = [sum(abs(x) for x in row) for row in rows]
    bound = math.factorial(n) * norm ** (n - 1)
    inverse_norm = lattice.matrix_l1_norm(inverse.entries)
    _emit({
        "k": k,
        "matrix": rows,
        "inverse": inverse.to_lists(),
        "verification": {
            "det": lattice.exact_determinant(rows),
            "first_row_is_k": rows[0] == k,
            "row_norms": row_norms,
            "row_norms_within_k": all(r <= norm for r in row_norms),
            "inverse_identity": lattice.matmul_int(rows, inverse.entries)
            == lattice.identity_int(n),
            "inverse_norm": inverse_norm,
            "inverse_norm_bound": bound,
            "inverse_within_bound": inverse_norm <= bound,
        },
    })


@lattice_group.command("smith")
@click.option("--rows", "rows_text", required=True, help="Rows separated by ';', e.g. '2 4; 1 3'")
@handle_errors
def lattice_smith(rows_text):
    """Smith normal form L = B . Delta . A."""
    rows = parse_matrix(rows_text, "--rows")
    dec = lattice.smith_normal_form(rows)
    _emit({
        "rows": rows,
        "d": list(dec.diag),
        "B": dec.b.to_lists(),
        "A": dec.a.to_lists(),
        "verification": {
            "reconstruction": dec.reconstruct() == rows,
            "divisibility_chain": dec.divisibility_chain_holds(),
            "det_B": dec.b.det,
            "det_A": dec.a.det,
        },
    })


def _exact(text: str, name: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"{name} is not a number: {text!r}") from None


@lattice_group.command("dirichlet")
@click.option("--center", required=True, help="Interval center (exact decimal or p/q)")
@click.option("--length", required=True, help="Interval length l > 0")
@handle_errors
def lattice_dirichlet(center, length):
    """Short rational in [c - l/2, c + l/2]."""
    c, l = _exact(center, "--center"), _exact(length, "--length")
    r = lattice.dirichlet_rational(c, l)
    bound = lattice.dirichlet_bound(l)
    _emit({
        "center": str(c),
        "length": str(l),
        "rational": str(r),
        "p": r.p,
        "q": r.q,
        "height": r.height,
        "bound": bound,
        "within_bound": r.height < bound,
        "in_interval": c - l / 2 <= r.as_fraction() <= c + l / 2,
    })


@lattice_group.command("volume")
@click.option("--rows", "rows_text", required=True, help="Basis rows separated by ';'")
@handle_errors
def lattice_volume(rows_text):
    """Volume of the module spanned by the rows."""
    rows = parse_matrix(rows_text, "--rows")
    _emit({"rows": rows, "volume": lattice.module_volume(rows)})


@lattice_group.command("bounds")
@click.option("--k", "k_text", required=True, help="Primitive vector")
@handle_errors
def lattice_bounds(k_text):
    """Bounds (n! K^(n-1), K) on the rank-one factorization constants."""
    k = parse_int_list(k_text, "--k")
    c_bound, c_prime_bound = lattice.lochak_bounds(k)
    _emit({"k": k, "K": sum(abs(x) for x in k),
           "c_lambda_bound": c_bound, "c_lambda_prime_bound": c_prime_bound})


@lattice_group.command("gcd")
@click.option("--x", "x", required=True, type=int)
@click.option("--y", "y", required=True, type=int)
@handle_errors
def lattice_gcd(x, y):
    """Bezout coefficients of least |u|."""
    d, u, v = lattice.ext_gcd_bounded(x, y)
    _emit({"x": x, "y": y, "d": d, "u": u, "v": v, "identity": u * x + v * y == d})


# ---------------------------------------------------------------------------
# resonance
# ---------------------------------------------------------------------------

@cli.command("resonance")
@click.option("--omega", required=True, help="Frequency vector, e.g. 1,2")
@click.option("--K", "K", required=True, type=float, help="Order cutoff")
@click.option("--tol", default=resonance.DEFAULT_TOL, show_default=True, type=float)
@handle_errors
def resonance_cmd(omega, K, tol):
    """Brute-force and ratio-detector resonance search at a fixed frequency."""
    w = parse_float_list(omega, "--omega")
    cfg = resonance.DetectorConfig(K=K, tol=tol)
    oracle = resonance.brute_force_resonant(w, cfg)
    event = resonance.detect_ratio_crossing(w, w, cfg)
    _emit({
        "omega": w,
        "ratio_coordinates": resonance.ratio_coordinates(w).tolist(),
        "oracle": oracle.to_list() if oracle else None,
        "oracle_distance": resonance.resonant_distance(w, oracle) if oracle else None,
        "detector": event.to_dict() if event else None,
    })


# ---------------------------------------------------------------------------
# envelope
# ---------------------------------------------------------------------------

@cli.command("envelope")
@click.option("--n", "n", required=True, type=int, help="Number of degrees of freedom")
@click.option("--alpha", type=float, default=None, help="Gevrey exponent (omit for analytic)")
@click.option("--delta", type=float, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("--eps", type=float, default=None, help="Perturbation size (omit for exponents only)")
@click.option("--rho", type=float, default=None, help="Also report the fixed-radius estimate")
@click.option("--multiplicity", type=int, default=None, help="Also report local exponents")
@click.option("--constants", "constants_file", type=click.Path(), default=None,
              help="JSON file of stable constants")
@handle_errors
def envelope_cmd(n, alpha, delta, gamma, eps, rho, multiplicity, constants_file):
    """Stability exponents, thresholds and predictions."""
    if (delta is None) == (gamma is None):
        raise DomainError("Give exactly one of --delta or --gamma")
    consts = load_constants(constants_file)
    payload: Dict[str, Any] = {"n": n, "regime": "analytic" if alpha is None else "gevrey"}

    if alpha is None:
        if gamma is None:
            gamma = envelope.analytic_gamma_from_delta(n, delta)
        else:
            delta = envelope.analytic_delta_from_gamma(n, gamma)
        payload.update(gamma=gamma, delta=delta, a_gamma=envelope.exponent_analytic(n, gamma))
        prediction = envelope.predict_analytic(n, delta, eps, consts) if eps else None
    else:
        if gamma is None:
            gamma = envelope.gevrey_gamma_from_delta(n, delta)
        else:
            delta = envelope.gevrey_delta_from_gamma(n, gamma)
        a, b = envelope.exponent_gevrey(n, alpha, gamma)
        payload.update(alpha=alpha, gamma=gamma, delta=delta, a_gamma=a, b_gamma=b)
        prediction = envelope.predict_gevrey(n, alpha, delta, eps, consts) if eps else None

    payload["prediction"] = prediction.to_dict() if prediction else None
    if rho is not None and eps:
        payload["fixed_radius"] = envelope.predict_fixed_radius(
            n, rho, eps, consts, alpha).to_dict()
    if multiplicity is not None:
        a_m, b_m = envelope.local_exponents(n, multiplicity, alpha or 1.0)
        payload["local_exponents"] = {"m": multiplicity, "a_m": a_m, "b_m": b_m}
    payload["shape_only"] = not consts.calibrated
    payload["constants"] = consts.to_dict()
    _emit(payload)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _check_conditions(spec, allow: bool):
    logger = get_logger()
    I0 = spec.default_actions()
    qc_ok, margin = check_qc(spec.integrable, I0, spec.m)
    bm_ok = check_derivative_bound(spec.integrable, sup_norm_grid(spec.n, spec.R), spec.M)
    failures = []
    if not qc_ok:
        failures.append(f"QC(m={spec.m}) fails at I0 (margin {margin:g})")
    if not bm_ok:
        failures.append(f"B(M={spec.M}) fails on the domain grid")
    if failures and not allow:
        raise DomainError("; ".join(failures) + " (use --allow-condition-failures)")
    for failure in failures:
        logger.warning("Continuing despite failed condition", condition=failure)
    return {"qc": bool(qc_ok), "qc_margin": float(margin), "derivative_bound": bool(bm_ok)}


@cli.command("simulate")
@click.option("--spec", "spec_path", type=click.Path(), default=None, help="SystemSpec JSON")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON file with simulate fields; flags win")
@click.option("--T", "T", type=float, default=None, help="Time horizon")
@click.option("--dt", type=float, default=None)
@click.option("--K", "K", type=float, default=None, help="Detector order cutoff")
@click.option("--tol", type=float, default=None, help="Detector tolerance")
@click.option("--rho", type=float, default=None, help="Stop when the drift reaches rho")
@click.option("--scheme", type=click.Choice([s.value for s in Scheme]), default=None)
@click.option("--sample-stride", type=int, default=None)
@click.option("--seed", type=int, default=None, help="Seed for random initial phases")
@click.option("--out-dir", type=click.Path(), default=None)
@click.option("--allow-condition-failures", is_flag=True, default=None,
              help="Warn instead of failing when QC or B(M) fail")
@handle_errors
def simulate_cmd(spec_path, config_path, T, dt, K, tol, rho, scheme, sample_stride, seed,
                 out_dir, allow_condition_failures):
    """Integrate one orbit, writing trajectory.csv, events.json and summary.json."""
    cfg = build_run_config(
        SimulateConfig, config_path, spec=spec_path, T=T, dt=dt, K=K, tol=tol, rho=rho,
        scheme=scheme, sample_stride=sample_stride, seed=seed, out_dir=out_dir,
        allow_condition_failures=allow_condition_failures,
    )
    spec = load_system_spec(cfg.spec)
    conditions = _check_conditions(spec, cfg.allow_condition_failures)

    integrator = IntegratorConfig(scheme=Scheme(cfg.scheme), dt=cfg.dt, fp_tol=cfg.fp_tol,
                                  fp_max_iters=cfg.fp_max_iters,
                                  sample_stride=cfg.sample_stride)
    detector = resonance.DetectorConfig(K=cfg.K, tol=cfg.tol)
    theta0 = initial_phases(spec.n, cfg.seed) if cfg.seed is not None else [0.0] * spec.n
    state0 = State.from_arrays(theta0, spec.default_actions())

    out = Path(cfg.out_dir)
    engine = TrajectoryEngine(spec, integrator, detector=detector)
    try:
        record = engine.integrate(state0, cfg.T, stop_drift=cfg.rho)
    except IntegratorError as e:
        if e.record is not None:
            write_trajectory_csv(e.record, str(out / "trajectory.csv"))
            write_events_json(e.record.events, str(out / "events.json"))
            write_json(str(out / "summary.json"), e.record.summary())
        raise

    write_trajectory_csv(record, str(out / "trajectory.csv"))
    write_events_json(record.events, str(out / "events.json"))
    summary = record.summary()
    summary.update(conditions=conditions, digest=record.digest(),
                   outputs={"trajectory": str(out / "trajectory.csv"),
                            "events": str(out / "events.json"),
                            "summary": str(out / "summary.json")})
    write_json(str(out / "summary.json"), summary)
    _emit(summary)


# ---------------------------------------------------------------------------
# sweep / fit
# ---------------------------------------------------------------------------

def _write_sweep(result: SweepResult, out_dir: str) -> Dict[str, Any]:
    out = Path(out_dir)
    write_sweep_csv(result, str(out / "sweep.csv"))
    summary = result.summary()
    write_json(str(out / "fit.json"), summary)
    summary["digest"] = result.digest()
    summary["outputs"] = {"sweep": str(out / "sweep.csv"), "fit": str(out / "fit.json")}
    return summary


@cli.command("sweep")
@click.option("--spec", "spec_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--eps", "eps_text", default=None, help="Decreasing grid, e.g. 1e-2,1e-3,1e-4")
@click.option("--rho", type=float, default=None)
@click.option("--T-max", "T_max", type=float, default=None)
@click.option("--seeds", "seeds_text", default=None, help="Seeds, e.g. 0,1,2")
@click.option("--workers", type=int, default=None, help="Pool size (default NEKHOLAB_WORKERS or cores)")
@click.option("--dt", type=float, default=None)
@click.option("--scheme", type=click.Choice([s.value for s in Scheme]), default=None)
@click.option("--K", "K", type=float, default=None, help="Count crossings of this order")
@click.option("--out-dir", type=click.Path(), default=None)
@click.option("--synthetic", default=None, help="Analytic table instead of integration, e.g. a=0.25")
@handle_errors
def sweep_cmd(spec_path, config_path, eps_text, rho, T_max, seeds_text, workers, dt, scheme,
              K, out_dir, synthetic):
    """Stability times over an epsilon grid, with the exponent fit."""
    cfg = build_run_config(
        SweepConfig, config_path, spec=spec_path,
        eps_grid=parse_float_list(eps_text, "--eps") if eps_text else None,
        rho=rho, T_max=T_max,
        seeds=parse_int_list(seeds_text, "--seeds") if seeds_text else None,
        workers=workers, dt=dt, scheme=scheme, K=K, out_dir=out_dir, synthetic=synthetic,
    )

    if cfg.synthetic is not None:
        grid = cfg.eps_grid or None
        result = synthetic_sweep(parse_synthetic(cfg.synthetic), grid, T_max=cfg.T_max)
        _emit(_write_sweep(result, cfg.out_dir))
        return

    spec = load_system_spec(cfg.spec)
    integrator = IntegratorConfig(scheme=Scheme(cfg.scheme), dt=cfg.dt)
    detector = resonance.DetectorConfig(K=cfg.K) if cfg.K else None
    workers = cfg.workers or SystemInfo().default_workers()
    result = run_sweep(spec, cfg.eps_grid, cfg.rho, cfg.T_max, integrator, cfg.seeds,
                       workers=workers, detector=detector)
    summary = _write_sweep(result, cfg.out_dir)
    _emit(summary)
    if all(r.status is RowStatus.FAILED for r in result.rows):
        _fail("runtime", "every sweep row failed", EXIT_RUNTIME)


def _rows_from_csv(path: str):
    rows = []
    for raw in read_csv(path):
        try:
            T = float(raw["T"]) if raw["T"] else math.nan
            rows.append(SweepRow(
                epsilon=float(raw["epsilon"]),
                seed=int(raw["seed"]),
                T=T,
                censored=raw["censored"] == "true",
                max_drift=float(raw["max_drift"]) if raw["max_drift"] else math.nan,
                crossings=int(raw["crossings"]),
                status=RowStatus.OK if raw["T"] else RowStatus.FAILED,
            ))
        except (KeyError, ValueError) as e:
            raise DomainError(f"Malformed sweep CSV {path}: {e}") from None
    return rows


@cli.command("fit")
@click.option("--csv", "csv_path", type=click.Path(), default=None, help="sweep.csv to fit")
@click.option("--synthetic", default=None, help="Analytic table, e.g. a=0.25")
@click.option("--eps", "eps_text", default=None, help="Grid for the synthetic table")
@click.option("--T-max", "T_max", type=float, default=math.inf)
@handle_errors
def fit_cmd(csv_path, synthetic, eps_text, T_max):
    """Fit a in T ~ exp(c eps^-a) from a sweep table."""
    if (csv_path is None) == (synthetic is None):
        raise DomainError("Give exactly one of --csv or --synthetic")
    if synthetic is not None:
        grid = parse_float_list(eps_text, "--eps") if eps_text else None
        result = synthetic_sweep(parse_synthetic(synthetic), grid, T_max=T_max)
    else:
        rows = _rows_from_csv(csv_path)
        grid = sorted({r.epsilon for r in rows}, reverse=True)
        validate_eps_grid(grid)
        result = SweepResult(rows=rows, summaries=summarize(rows, grid, T_max),
                             rho=math.nan, T_max=T_max)
    fit = fit_exponent(result)
    _emit({"fit": fit.to_dict(), "per_epsilon": [s.to_dict() for s in result.summaries]})


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------

@cli.command("selftest")
@click.option("--suite", "suites", multiple=True, type=click.Choice(list(SUITES)),
              help="Run only these suites (repeatable)")
@click.option("--timing/--no-timing", default=False, help="Include per-suite seconds on stdout")
@click.option("--certificate", "cert_output", type=click.Path(), default=None,
              help="Write a certificate (.json or .pdf)")
@handle_errors
def selftest_cmd(suites, timing, cert_output):
    """Run the property suites; exit 1 with a counterexample on failure."""
    results = run_selftest(list(suites) or None)
    passed = all(r.passed for r in results)
    _emit({"passed": passed, "suites": [r.to_dict(include_timing=timing) for r in results]})

    if cert_output:
        generator = CertificateGenerator(package_version=__version__,
                                         host=SystemInfo().host_facts())
        cert = generator.generate_certificate([r.to_dict() for r in results])
        if cert_output.endswith(".json"):
            saved = generator.save_certificate_json(cert, cert_output)
        else:
            saved = generator.save_certificate_pdf(cert, cert_output)
        if not saved:
            click.echo(json.dumps({"warning": "certificate not written",
                                   "path": cert_output}), err=True)

    if not passed:
        failed = next(r for r in results if not r.passed)
        _fail("selftest", f"{failed.name}: counterexample {json.dumps(failed.counterexample)}",
              EXIT_SELFTEST_FAILED)


def main(args: Optional[list] = None):
    """Main entry point for CLI."""
    cli(args=args)


if __name__ == "__main__":
    main()
