"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError and
CheckpointError -> 2, DivergenceError -> 3.
"""


class EmographError(Exception):
    """Base class for all package errors."""


class ShapeError(EmographError, ValueError):
    """Operand shapes are incompatible for the requested operation."""


class ConfigError(EmographError, ValueError):
    """A configuration value is outside its allowed domain."""


class ContractError(EmographError, ValueError):
    """A call violated an operation's precondition."""


class DegenerateRowError(ContractError):
    """A row-wise operation hit a row with no admissible entries."""


class DataError(EmographError, ValueError):
    """A corpus, label, or other input file is malformed or inconsistent."""


class CheckpointError(EmographError, ValueError):
    """A checkpoint file cannot be parsed or has an unsupported version."""


class DivergenceError(EmographError, RuntimeError):
    """Training produced a non-finite loss."""
