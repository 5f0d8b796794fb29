"""Exception hierarchy shared by the codecs, the cluster and the CLI."""


class StaircaseError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class UsageError(StaircaseError, ValueError):
    """Invalid parameters or mismatched operands."""

    exit_code = 2


class FieldMismatchError(UsageError):
    pass


class InsufficientSharesError(StaircaseError):
    """Not enough shares (or sub-shares) to decode."""

    exit_code = 3


class IntegrityError(StaircaseError):
    """Redundant shares disagree with each other."""

    exit_code = 4

    def __init__(self, message, workers=None):
        super().__init__(message)
        self.workers = tuple(workers) if workers is not None else ()


class SingularMatrixError(StaircaseError, ArithmeticError):
    exit_code = 4


class InconsistentSystemError(IntegrityError):
    pass


class StorageError(StaircaseError):
    """A file could not be read or written."""

    exit_code = 5


class FormatError(StorageError):
    """Malformed matrix or share file."""


class ProtocolError(StaircaseError):
    """Malformed wire message or failed cluster round."""

    exit_code = 6


class RoundFailure(ProtocolError):
    pass
