"""Exception hierarchy shared by the workbench modules."""


class WorkbenchError(Exception):
    """Base class for all workbench errors."""


class MalformedCode(WorkbenchError):
    """A self-delimiting code ran off the end of its stream."""


class OperandOutOfRange(WorkbenchError):
    """An assembler operand cannot be gamma coded (it must be >= 1)."""


class ResourceLimit(WorkbenchError):
    """An enumeration stage would exceed the configured work cap."""


class FingerprintMismatch(WorkbenchError):
    """A ledger was produced under a different machine profile."""


class CorruptLedger(WorkbenchError):
    """A ledger or snapshot file could not be parsed."""


class InsufficientBudget(WorkbenchError):
    """A Kraft-Chaitin request cannot be satisfied by the remaining measure."""


class UndiscoveredPrefix(WorkbenchError):
    """A patched prefix needs a complexity value that is still undiscovered."""


class BoundaryAmbiguity(WorkbenchError):
    """A certified enclosure straddles a dyadic rational at the requested precision."""


class SearchBudgetExceeded(WorkbenchError):
    """A length-lexicographic search gave up before finding a witness."""


class OracleDisagreement(WorkbenchError):
    """An oracle machine returned a value other than the expected inverse."""


class NonIncreasingSchedule(WorkbenchError):
    """Insertion positions failed to be strictly increasing."""


class InvalidStream(WorkbenchError):
    """A complexity event stream violates its monotonicity contract."""
