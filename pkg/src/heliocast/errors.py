"""Exception types shared across the package.

The CLI maps these onto exit codes: usage/validation errors -> 1, missing or
malformed data -> 2, numerical failures -> 3.
"""


class InputError(ValueError):
    """Invalid argument or malformed input value."""


class DataError(Exception):
    """Required data is missing or inconsistent on disk."""


class NumericalError(RuntimeError):
    """A numerical routine failed after its bounded retries."""


class UnsupportedStructureError(InputError):
    """Graph structure outside the decomposable band family."""
