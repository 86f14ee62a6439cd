"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class XBNetError(Exception):
    exit_code = 1


class ValidationError(XBNetError, ValueError):
    """Bad arguments, configs or preconditions."""


class ShapeError(ValidationError):
    pass


class ScaleError(ValidationError):
    pass


class NonFiniteError(ValidationError):
    """An arithmetic result overflowed to inf or NaN."""


class DataError(XBNetError):
    """File, parse and schema problems."""

    exit_code = 2


class SchemaMismatchError(DataError):
    pass


class FormatVersionError(DataError):
    pass


class DivergenceError(XBNetError, ArithmeticError):
    exit_code = 3
