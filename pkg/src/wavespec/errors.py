"""Exception hierarchy shared by the library and the CLI."""


class WavespecError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ConfigurationError(WavespecError, ValueError):
    exit_code = 2


class ArgumentError(WavespecError, ValueError):
    exit_code = 2


class FormatError(WavespecError, ValueError):
    exit_code = 2


class ValidationError(WavespecError, ValueError):
    exit_code = 2


class EstimationError(WavespecError, ArithmeticError):
    exit_code = 3


class DegenerateInputError(EstimationError):
    exit_code = 3
