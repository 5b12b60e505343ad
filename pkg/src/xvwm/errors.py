"""Shared exception taxonomy.

Every error the CLI can surface maps to one of these classes; the CLI
prints ``error.<class>: <message>`` and exits non-zero, so the class names
are part of the machine-parsable surface.
"""


class XvwmError(Exception):
    """Base class for all package errors."""


class ConfigurationError(XvwmError):
    """Invalid or inconsistent configuration values."""


class DomainError(XvwmError):
    """Input outside the mathematical domain of an operation."""


class RangeError(XvwmError):
    """Index or offset outside its permitted range."""


class UsageError(XvwmError):
    """API misuse: shape mismatch, consumed graph, unknown identifier."""


class FormatError(XvwmError):
    """Malformed serialized artifact (episode file, checkpoint, config)."""


class ProtocolError(XvwmError):
    """Malformed or out-of-contract wire message."""


class TrainingAborted(XvwmError):
    """Training stopped on a non-finite loss; carries the batch descriptor."""

    def __init__(self, message: str, batch_descriptor=None):
        super().__init__(message)
        self.batch_descriptor = batch_descriptor
