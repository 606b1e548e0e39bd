"""Exception hierarchy shared by every module."""


class ArtifactError(Exception):
    """Base class for all errors raised by the package."""


class InputError(ArtifactError, ValueError):
    """Malformed or out-of-range input (missing grid point, bad arity, ...)."""


class UsageError(ArtifactError, TypeError):
    """An API was called in a way its contract forbids (mixed fields, wrong dimension)."""


class DomainError(ArtifactError, ZeroDivisionError):
    """Arithmetic outside the domain of an operation, e.g. inverting zero."""


class CapabilityError(ArtifactError):
    """The request is well formed but exceeds the desk-scale envelope."""


class ProtocolError(ArtifactError):
    """A protocol could not be run to completion (e.g. degenerate sampling)."""


class CompositionError(ArtifactError):
    """Composition preconditions failed; the message names the inequality."""


class MalformedAnswer(ArtifactError):
    """A prover answer does not have the shape the decoder expects."""


class ReportError(ArtifactError, OSError):
    """A report could not be written; the message carries the path."""
