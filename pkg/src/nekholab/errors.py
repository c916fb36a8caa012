"""
Exception hierarchy for nekholab.

Every operation that rejects its input raises a DomainError, which is also a
ValueError so callers that only know about the builtin still catch it.
"""

from typing import Any, Dict, Optional


class NekholabError(Exception):
    """Base class for all nekholab errors."""


class DomainError(NekholabError, ValueError):
    """Input outside the domain of an operation."""


class ConfigError(DomainError):
    """Malformed configuration or spec file."""


class ResourceError(NekholabError):
    """A configured computation budget would be exceeded."""


class IntegratorError(NekholabError):
    """Implicit step failed to converge or a step precondition failed."""

    def __init__(self,
                 message: str,
                 diagnostics: Optional[Dict[str, Any]] = None,
                 record: Any = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
        # partial TrajectoryRecord, attached by the engine when available
        self.record = record
