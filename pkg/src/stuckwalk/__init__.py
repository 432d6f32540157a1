"""stuckwalk: simulation and verification toolkit for self-interacting
nearest-neighbor walks on the integers that localize on a finite window."""

__version__ = "0.1.0"

from .errors import (
    CapacityError,
    ConstructionFailure,
    CriticalValue,
    DomainError,
    IdentityError,
    Infeasible,
    NoTheory,
    RegimeError,
    StuckWalkError,
    TooShort,
)
from .spectrum import Params, alpha_threshold, classify, omega

__all__ = [
    "__version__",
    "Params", "alpha_threshold", "classify", "omega",
    "StuckWalkError", "DomainError", "CriticalValue", "RegimeError",
    "Infeasible", "CapacityError", "TooShort", "NoTheory",
    "ConstructionFailure", "IdentityError",
]
