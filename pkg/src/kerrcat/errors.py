"""Exception types shared across the package."""


class KerrcatError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(KerrcatError):
    """Operands live on different Hilbert spaces."""


class TruncationError(KerrcatError):
    """Requested amplitude does not fit the truncated Fock space."""


class HermiticityError(KerrcatError):
    """An operator required to be hermitian is not."""


class StateValidationError(KerrcatError):
    """State fails its normalization / trace / hermiticity contract."""


class InvalidParameterError(KerrcatError):
    """Parameter set violates a documented precondition."""


class SolverAccuracyError(KerrcatError):
    """Propagation finished but an accuracy guarantee was violated."""


class PositivityError(KerrcatError):
    """A density matrix developed a negative eigenvalue beyond tolerance."""


class ConfigError(KerrcatError):
    """Config file is malformed or contains unknown/invalid entries."""
