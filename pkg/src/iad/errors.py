"""Exception types raised across the package.

Everything derives from :class:`IADError` so callers (and the CLI) can catch
the whole family in one place.  Validation-type failures also derive from
``ValueError``.
"""

from __future__ import annotations


class IADError(Exception):
    """Base class for all package errors."""


class ValidationError(IADError, ValueError):
    """Input failed a structural check; detection is aborted."""


def _where(vm_id: str, vmm_id: str | None) -> str:
    return f"VM {vm_id!r}" + (f" of VMM {vmm_id!r}" if vmm_id else "")


class EmptySeries(ValidationError):
    def __init__(self, vm_id: str, vmm_id: str | None = None):
        self.vm_id = vm_id
        self.vmm_id = vmm_id
        super().__init__(f"EmptySeries: {_where(vm_id, vmm_id)} has no samples")


class LengthMismatch(ValidationError):
    def __init__(self, expected: int, vm_id: str, actual: int, vmm_id: str | None = None):
        self.expected = expected
        self.vm_id = vm_id
        self.actual = actual
        self.vmm_id = vmm_id
        super().__init__(
            f"LengthMismatch: {_where(vm_id, vmm_id)} has {actual} ticks, expected {expected}"
        )


class InvalidSample(ValidationError):
    pass


class InvalidConfig(ValidationError):
    pass


class InvalidWindow(ValidationError):
    pass


class InsufficientHistory(IADError):
    pass


class ArityMismatch(ValidationError):
    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"expected {expected} values for this tick, got {actual}")


class InvalidSpec(ValidationError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class IntervalOutOfRange(ValidationError):
    pass


class PoolTooSmall(ValidationError):
    pass


class MalformedRow(ValidationError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class MissingHeader(ValidationError):
    pass


class NonRectangular(ValidationError):
    pass


class MissingPrediction(ValidationError):
    """A labeled VMM has no prediction (or, in strict mode, a predicted VMM has no label)."""

    def __init__(self, vmm_id: str, missing: str = "prediction"):
        self.vmm_id = vmm_id
        self.missing = missing
        super().__init__(f"MissingPrediction: no {missing} for VMM {vmm_id!r}")
