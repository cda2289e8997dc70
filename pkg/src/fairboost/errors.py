"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class FairBoostError(Exception):
    exit_code = 1


class UsageError(FairBoostError):
    exit_code = 2


class SchemaError(FairBoostError):
    exit_code = 3


class DataError(FairBoostError):
    exit_code = 3


class ShapeError(FairBoostError, ValueError):
    exit_code = 3


class DegenerateGroupError(DataError):
    """A rate is undefined because its conditioning subset is empty."""


class NumericError(FairBoostError, ArithmeticError):
    exit_code = 4


class RangeError(FairBoostError, ValueError):
    exit_code = 2


class ModelFormatError(FairBoostError):
    exit_code = 5
