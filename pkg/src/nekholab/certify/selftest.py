"""
Exhaustive and seeded property suites over the exact algorithms.

Each suite checks the contract of one operation on a fixed, deterministic
set of inputs and keeps the first counterexample it meets. The suites call
the lattice functions through the module so a deliberately broken
implementation can be substituted under test.
"""

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from ..core import envelope, lattice
from ..errors import DomainError, NekholabError
from ..utils.logger import get_logger

DEFAULT_SEED = 20240517


@dataclass
class SuiteResult:
    name: str
    cases: int
    failures: int
    seconds: float
    counterexample: Optional[Dict[str, Any]] = None

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        out = {
            "name": self.name,
            "cases": self.cases,
            "failures": self.failures,
            "counterexample": self.counterexample,
        }
        if include_timing:
            out["seconds"] = round(self.seconds, 3)
        return out


class _Tally:
    def __init__(self, name: str):
        self.name = name
        self.cases = 0
        self.failures = 0
        self.counterexample = None
        self.started = time.perf_counter()

    def check(self, ok: bool, **example):
        self.cases += 1
        if not ok:
            self.failures += 1
            if self.counterexample is None:
                self.counterexample = example

    def result(self) -> SuiteResult:
        return SuiteResult(self.name, self.cases, self.failures,
                           time.perf_counter() - self.started, self.counterexample)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def suite_bezout(limit: int = 200) -> SuiteResult:
    """u x + v y = d with |u| <= |y|/d and |v| <= |x|/d for 1 <= |x|, |y| <= limit."""
    tally = _Tally("bezout")
    values = [v for v in range(-limit, limit + 1) if v]
    for x in values:
        for y in values:
            d, u, v = lattice.ext_gcd_bounded(x, y)
            ok = (d == math.gcd(x, y) and u * x + v * y == d
                  and abs(u) * d <= abs(y) and abs(v) * d <= abs(x))
            tally.check(ok, x=x, y=y, d=d, u=u, v=v)
    return tally.result()


def _random_primitive(rng: np.random.Generator, n: int, max_l1: int) -> List[int]:
    while True:
        k = [int(c) for c in rng.integers(-max_l1, max_l1 + 1, size=n)]
        if any(k) and sum(abs(c) for c in k) <= max_l1 and lattice.gcd_of(k) == 1:
            return k


def _completion_holds(k: List[int]) -> bool:
    try:
        a = lattice.unimodular_completion(k)
    except NekholabError:
        return False
    rows = a.to_lists()
    n, norm = len(k), sum(abs(c) for c in k)
    if rows[0] != list(k) or abs(lattice.exact_determinant(rows)) != 1:
        return False
    if any(sum(abs(x) for x in row) > norm for row in rows):
        return False
    inverse = lattice.inverse_unimodular(rows)
    return lattice.matrix_l1_norm(inverse.entries) <= math.factorial(n) * norm ** (n - 1)


def suite_completion(seed: int = DEFAULT_SEED, random_cases: int = 1000) -> SuiteResult:
    """Every primitive k in Z^2 with |k| <= 50, plus random k for n = 3, 4, 5."""
    tally = _Tally("completion")
    for a in range(-50, 51):
        for b in range(-50, 51):
            if (a or b) and abs(a) + abs(b) <= 50 and math.gcd(a, b) == 1:
                tally.check(_completion_holds([a, b]), k=[a, b])

    rng = _rng(seed)
    for n in (3, 4, 5):
        for _ in range(random_cases):
            k = _random_primitive(rng, n, 20)
            tally.check(_completion_holds(k), k=k)
    return tally.result()


def _short_rational_exists(lo: Fraction, hi: Fraction, bound: float) -> bool:
    """Brute force: some p/q in [lo, hi] with |p| + q < bound."""
    q = 1
    while q < bound:
        if hi < 0:
            p = (hi.numerator * q) // hi.denominator  # floor(hi * q)
            fits = Fraction(p, q) >= lo
        else:
            p = -((-lo.numerator * q) // lo.denominator)  # ceil(lo * q)
            fits = Fraction(p, q) <= hi
        if fits and abs(p) + q < bound:
            return True
        q += 1
    return False


def suite_dirichlet(seed: int = DEFAULT_SEED, cases: int = 10_000) -> SuiteResult:
    """
    Membership and reducedness always; |p| + q < 4 sqrt(2) l^-1/2 unless no
    rational of the interval meets the bound.
    """
    tally = _Tally("dirichlet")
    rng = _rng(seed + 1)
    fallbacks = 0
    for _ in range(cases):
        length = float(10 ** rng.uniform(-4, 0))
        half = length / 2
        center = float(rng.uniform(-1 + half, 1 - half))
        r, missed = lattice.dirichlet_candidate(center, length)
        fallbacks += missed
        c, l = Fraction(center), Fraction(length)
        lo, hi = c - l / 2, c + l / 2
        bound = lattice.dirichlet_bound(length)
        inside = lo <= r.as_fraction() <= hi
        reduced = math.gcd(abs(r.p), r.q) == 1
        short = r.height < bound or not _short_rational_exists(lo, hi, bound)
        tally.check(inside and reduced and short, center=center, length=length,
                    p=r.p, q=r.q)
    get_logger().debug("Dirichlet fallbacks", cases=cases, fallbacks=fallbacks)
    return tally.result()


def suite_smith(seed: int = DEFAULT_SEED, cases: int = 500) -> SuiteResult:
    """Exact reconstruction and the divisibility chain on random full-rank matrices."""
    tally = _Tally("smith")
    rng = _rng(seed + 2)
    done = 0
    while done < cases:
        n = int(rng.integers(1, 6))
        r = int(rng.integers(1, min(3, n) + 1))
        rows = [[int(x) for x in rng.integers(-9, 10, size=n)] for _ in range(r)]
        try:
            dec = lattice.smith_normal_form(rows)
        except DomainError:
            continue  # rank-deficient draw
        done += 1
        ok = dec.reconstruct() == rows and dec.divisibility_chain_holds()
        if r == 1 and lattice.gcd_of(rows[0]) == 1:
            ok = ok and dec.diag == (1,)
        tally.check(ok, rows=rows, diag=list(dec.diag))
    return tally.result()


def suite_exponents(samples: int = 100) -> SuiteResult:
    """Range, monotonicity and conversion identities of the exponent algebra."""
    tally = _Tally("exponents")
    tol = 1e-12
    for n in range(2, 11):
        g_max = envelope.analytic_gamma_bound(n)
        a_top = envelope.exponent_analytic(n, g_max)
        tally.check(abs(a_top - 1.0 / (2 * n)) <= tol, n=n, gamma=g_max, a=a_top)

        gammas = [g_max * (i + 1) / samples for i in range(samples)]
        values = [envelope.exponent_analytic(n, g) for g in gammas]
        for g, a in zip(gammas, values):
            ok = (1.0 / (2 * n) - tol <= a < 1.0 / (2 * (n - 1)) and g <= a + tol)
            delta = envelope.analytic_delta_from_gamma(n, g)
            ok = ok and abs(a - (1.0 / (2 * (n - 1)) - delta)) <= tol
            tally.check(ok, n=n, gamma=g, a=a)
        tally.check(all(x > y for x, y in zip(values, values[1:])), n=n,
                    property="analytic exponent decreasing")

        gg_max = envelope.gevrey_gamma_bound(n)
        for i in range(samples):
            g = gg_max * (i + 1) / samples
            for alpha in (1.0, 2.0):
                a, b = envelope.exponent_gevrey(n, alpha, g)
                delta = envelope.gevrey_delta_from_gamma(n, g)
                ok = abs(a - (1.0 / (2 * alpha * (n - 1)) - delta / alpha)) <= tol
                ok = ok and (n - 2) / (5 * (n - 1) ** 2) - tol <= b <= 1.0 / (2 * (n - 1)) + tol
                ok = ok and g <= b + tol
                tally.check(ok, n=n, alpha=alpha, gamma=g, a=a, b=b)
    return tally.result()


SUITES: Dict[str, Callable[[], SuiteResult]] = {
    "bezout": suite_bezout,
    "completion": suite_completion,
    "dirichlet": suite_dirichlet,
    "smith": suite_smith,
    "exponents": suite_exponents,
}


def run_selftest(names: Optional[List[str]] = None) -> List[SuiteResult]:
    """
    Run the named suites (all by default) in a fixed order.

    Raises:
        DomainError: for an unknown suite name
    """
    selected = list(SUITES) if not names else list(names)
    unknown = [n for n in selected if n not in SUITES]
    if unknown:
        raise DomainError(f"Unknown self-test suite(s): {', '.join(unknown)}")

    logger = get_logger()
    results = []
    for name in selected:
        result = SUITES[name]()
        logger.log_suite_result(result.name, result.cases, result.failures, result.seconds)
        results.append(result)
    return results
