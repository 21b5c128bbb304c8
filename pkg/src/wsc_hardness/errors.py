"""Exception hierarchy shared by every module.

Each concrete class carries the process exit code the CLI maps it to.
"""


class HardnessError(Exception):
    exit_code = 1


class ParseError(HardnessError):
    exit_code = 3

    def __init__(self, message, record=None):
        if record is not None:
            message = f"record {record}: {message}"
        super().__init__(message)
        self.record = record


class ValidationError(HardnessError):
    exit_code = 4

    def __init__(self, message, half_id=None):
        if half_id is not None:
            message = f"half {half_id!r}: {message}"
        super().__init__(message)
        self.half_id = half_id


class DegenerateSplitError(HardnessError):
    exit_code = 5


class EmptyEligibleSetError(HardnessError):
    exit_code = 5


class NoVerbFoundError(HardnessError):
    exit_code = 6


class UndeterminedError(HardnessError):
    """A feature's input could not be located; callers emit sentinels."""
    exit_code = 6


class CacheMissOffline(HardnessError):
    exit_code = 7


class NetworkError(HardnessError):
    exit_code = 8


class ResourceError(HardnessError):
    exit_code = 9


class DimensionMismatch(HardnessError, ValueError):
    exit_code = 10


class NonFiniteInput(HardnessError, ValueError):
    exit_code = 10


class HyperparameterError(HardnessError, ValueError):
    exit_code = 10


class ModelFormatError(HardnessError):
    exit_code = 11


class ModelVersionError(ModelFormatError):
    exit_code = 12


class MetricInputError(HardnessError, ValueError):
    exit_code = 13


class EvaluationError(HardnessError):
    exit_code = 13


class TrainingError(HardnessError):
    exit_code = 14
