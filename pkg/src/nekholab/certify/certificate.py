"""
Content digests and verification certificates.

Digests are SHA-256 over a canonical JSON rendering, so two runs agree on a
digest exactly when their recorded content agrees. A self-test run can be
written out as a JSON or PDF certificate carrying the per-suite results, the
host facts and the digest of the results.
"""

import json
import secrets
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from cryptography.hazmat.primitives import hashes
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import getSampleStyleSheet
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from ..utils.logger import get_logger


def canonical_json(payload: Any) -> str:
    """Key-sorted compact JSON; floats keep their shortest round-trip repr."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=True)


def content_digest(payload: Any) -> str:
    """SHA-256 hex digest of the canonical JSON of payload."""
    digest = hashes.Hash(hashes.SHA256())
    digest.update(canonical_json(payload).encode("utf-8"))
    return digest.finalize().hex()


@dataclass
class SelftestCertificate:
    """Record of one self-test run."""

    certificate_id: str
    package_version: str
    suites: List[Dict[str, Any]]
    passed: bool
    host: Dict[str, Any]
    created_at: str
    results_digest: str
    version: str = "1.0"

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


@dataclass
class CertificateGenerator:
    """Builds and verifies self-test certificates in JSON and PDF form."""

    package_version: str
    host: Dict[str, Any] = field(default_factory=dict)

    def generate_certificate(self, suites: List[Dict[str, Any]]) -> SelftestCertificate:
        """
        Create a certificate for the given suite summaries.

        Args:
            suites: One dict per suite (name, cases, failures, counterexample)

        Returns:
            SelftestCertificate: Certificate with the results digest filled in
        """
        return SelftestCertificate(
            certificate_id=self._generate_certificate_id(),
            package_version=self.package_version,
            suites=list(suites),
            passed=all(s.get("failures", 0) == 0 for s in suites),
            host=dict(self.host),
            created_at=datetime.now(timezone.utc).isoformat(),
            results_digest=content_digest(self._digest_payload(suites)),
        )

    def verify_certificate(self, certificate: SelftestCertificate) -> bool:
        """True if the results digest matches the recorded suites."""
        expected = content_digest(self._digest_payload(certificate.suites))
        return expected == certificate.results_digest

    def save_certificate_json(self, certificate: SelftestCertificate, output_path: str) -> bool:
        try:
            with open(output_path, "w", encoding="utf-8") as f:
                f.write(certificate.to_json())
            return True
        except OSError as e:
            get_logger().error("Could not write certificate", path=output_path, error=str(e))
            return False

    def save_certificate_pdf(self, certificate: SelftestCertificate, output_path: str) -> bool:
        try:
            self._generate_pdf_certificate(certificate, output_path)
            return True
        except OSError as e:
            get_logger().error("Could not write certificate", path=output_path, error=str(e))
            return False

    @staticmethod
    def _digest_payload(suites: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
        # timings vary between runs and stay out of the digest
        return [{k: v for k, v in s.items() if k != "seconds"} for s in suites]

    def _generate_certificate_id(self) -> str:
        timestamp = datetime.now().strftime("%Y%m%d%H%M%S")
        return f"NL-{timestamp}-{secrets.token_hex(4).upper()}"

    def _generate_pdf_certificate(self, certificate: SelftestCertificate, output_path: str):
        doc = SimpleDocTemplate(output_path, pagesize=A4)
        styles = getSampleStyleSheet()
        table_style = TableStyle([
            ("ALIGN", (0, 0), (-1, -1), "LEFT"),
            ("FONTNAME", (0, 0), (0, -1), "Helvetica-Bold"),
            ("FONTSIZE", (0, 0), (-1, -1), 10),
            ("BOTTOMPADDING", (0, 0), (-1, -1), 6),
        ])

        story = [Paragraph("nekholab Self-Test Certificate", styles["Title"]), Spacer(1, 20)]

        header = [
            ["Certificate ID:", certificate.certificate_id],
            ["Package version:", certificate.package_version],
            ["Created:", certificate.created_at[:19].replace("T", " ")],
            ["Outcome:", "PASSED" if certificate.passed else "FAILED"],
        ]
        header_table = Table(header, colWidths=[120, 300])
        header_table.setStyle(table_style)
        story += [header_table, Spacer(1, 20)]

        story.append(Paragraph("Property Suites", styles["Heading2"]))
        rows = [["Suite", "Cases", "Failures", "Seconds"]]
        for s in certificate.suites:
            rows.append([
                s.get("name", ""), str(s.get("cases", 0)), str(s.get("failures", 0)),
                f"{s.get('seconds', 0.0):.3f}",
            ])
        suite_table = Table(rows, colWidths=[150, 80, 80, 80])
        suite_table.setStyle(TableStyle([
            ("FONTNAME", (0, 0), (-1, 0), "Helvetica-Bold"),
            ("FONTSIZE", (0, 0), (-1, -1), 10),
            ("BOTTOMPADDING", (0, 0), (-1, -1), 6),
        ]))
        story += [suite_table, Spacer(1, 20)]

        story.append(Paragraph("Host", styles["Heading2"]))
        host_rows = [[f"{k}:", str(v)] for k, v in sorted(certificate.host.items())]
        if host_rows:
            host_table = Table(host_rows, colWidths=[120, 300])
            host_table.setStyle(table_style)
            story.append(host_table)
        story.append(Spacer(1, 20))

        story.append(Paragraph("Verification", styles["Heading2"]))
        digest_table = Table([["Results digest:", certificate.results_digest]],
                             colWidths=[120, 300])
        digest_table.setStyle(table_style)
        story.append(digest_table)

        doc.build(story)


def load_certificate(path: str) -> Optional[SelftestCertificate]:
    """Read a JSON certificate back; None if it is not one."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        return SelftestCertificate(**data)
    except (OSError, ValueError, TypeError):
        return None
