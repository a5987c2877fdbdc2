"""Exception hierarchy shared across the package."""


class CLError(Exception):
    """Base class for all package errors."""


class InvalidWeightsError(CLError, ValueError):
    """Weight scheme violates non-negativity, dimension, or positive-total rules."""


class CapabilityError(CLError):
    """A model was asked for a density it does not provide."""


class DegenerateDataError(CLError, ValueError):
    """Data cannot support the requested fit (e.g. a constant coordinate)."""


class ContractError(CLError):
    """An estimate was used against the half of the sample it was fitted on."""


class DataError(CLError, ValueError):
    """Malformed input data or parameter files."""
