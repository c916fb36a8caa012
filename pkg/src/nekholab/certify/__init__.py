"""Self-test suites and their certificates."""

from .certificate import CertificateGenerator, SelftestCertificate
from .selftest import SUITES, SuiteResult, run_selftest

__all__ = ["CertificateGenerator", "SelftestCertificate", "SUITES", "SuiteResult", "run_selftest"]
