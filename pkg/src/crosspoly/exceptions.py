"""Exception hierarchy shared by every engine.

The CLI maps these onto process exit codes, so new engines should raise
one of these rather than a bare ``ValueError``.
"""


class VolumeError(Exception):
    """Base class for all errors raised by :mod:`crosspoly`."""

    exit_code = 1


class InvalidInstance(VolumeError, ValueError):
    """The instance is malformed: bad dimensions, out-of-range radius, etc."""

    exit_code = 2


class PreconditionViolation(VolumeError, ValueError):
    """The instance is well-formed but an algorithmic precondition fails."""

    exit_code = 3


class DegenerateInput(VolumeError, ValueError):
    """Input is not in general position (or not full-dimensional)."""

    exit_code = 4


class OriginNotInterior(DegenerateInput):
    """The re-centred vertex set does not contain the origin in its interior."""


class InternalInconsistency(VolumeError, RuntimeError):
    """A branch that the algorithm's assumptions rule out was reached."""
