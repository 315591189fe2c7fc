"""Cat-qubit simulator for a driven Kerr resonator coupled to a cavity."""

__version__ = "0.1.0"

from . import catspace, config, dynamics, experiments, models, qops  # noqa: F401
from .errors import (  # noqa: F401
    ConfigError,
    DimensionMismatchError,
    HermiticityError,
    InvalidParameterError,
    KerrcatError,
    PositivityError,
    SolverAccuracyError,
    StateValidationError,
    TruncationError,
)
