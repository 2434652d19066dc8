__all__ = [
    "FloqError",
    "DomainMismatchError",
    "VariableTableError",
    "MissingVariableError",
    "UnsupportedPeriodError",
    "GenericityError",
    "DimensionError",
    "LeadingTermError",
    "CeilingExceededError",
    "SolverError",
    "LatticeError",
    "PotentialFileError",
]


class FloqError(Exception):
    """
    Root of every error raised by the floq package.

    The command line maps any subclass to exit status 1 and prints the class
    name together with the message as a JSON object.
    """


class DomainMismatchError(FloqError):
    """Coefficient domains differ, or a value is not representable in a domain."""


class VariableTableError(FloqError):
    """Variable tables differ, a name is unknown, or an exponent is invalid."""


class MissingVariableError(FloqError):
    """An evaluation assignment does not cover every variable in use."""


class UnsupportedPeriodError(FloqError):
    """The period is outside the supported range for the requested operation."""


class GenericityError(FloqError):
    """The reference point of the extended system has repeated coordinates."""


class DimensionError(FloqError):
    """A potential does not have the expected number of coordinates."""


class LeadingTermError(FloqError):
    """
    A generator of the closed-form basis failed its leading-term check.

    :ivar k: One-based index of the offending generator.
    :type k: int
    """

    def __init__(self, k: int, message: str):
        super().__init__(f"generator g_{k}: {message}")
        self.k = k


class CeilingExceededError(FloqError):
    """The quotient basis is larger than the configured ceiling."""


class SolverError(FloqError):
    """The eigen-decomposition of the quotient operators failed."""


class LatticeError(FloqError):
    """The lattice generators are singular or otherwise unusable."""


class PotentialFileError(FloqError):
    """A potential file does not follow the documented JSON schema."""
