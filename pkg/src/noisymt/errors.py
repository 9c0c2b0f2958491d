"""Exception hierarchy shared by all modules.

The ``exit_code`` attribute is what the CLI returns when the error
escapes to the top level: 1 for configuration problems, 2 for bad data,
3 for misbehaving external hooks.
"""


class NoisyMTError(Exception):
    exit_code = 2


class ValidationError(NoisyMTError):
    """Invalid configuration, arguments or parameters."""
    exit_code = 1


class DataError(NoisyMTError):
    """Malformed or inconsistent input data."""
    exit_code = 2


class HookFailure(NoisyMTError):
    """An external hook executable failed or broke its line contract."""
    exit_code = 3


class EmptyCorpus(DataError):
    pass


class VocabTooSmall(ValidationError):
    pass


class UnclassifiablePiece(DataError):
    pass


class DanglingMarker(DataError):
    pass


class MalformedMatrix(DataError):
    pass


class AlignmentError(DataError):
    pass


class LengthMismatch(DataError):
    pass


class AlreadyTagged(DataError):
    pass


class EmptyPool(DataError):
    pass
