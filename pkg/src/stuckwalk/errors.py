"""Exception types shared across the toolkit."""


class StuckWalkError(Exception):
    """Base class for all toolkit errors."""


class DomainError(StuckWalkError):
    """Parameter outside the mathematical domain (e.g. alpha <= 1/3)."""


class CriticalValue(StuckWalkError):
    """alpha sits on (or too close to) a regime threshold, which is not handled."""


class RegimeError(StuckWalkError):
    """Operation requested outside the regime it is valid for (wrong K vs L)."""


class Infeasible(StuckWalkError):
    """A linear system has no solution satisfying the requested constraints."""


class CapacityError(StuckWalkError):
    """Exact enumeration requested beyond the supported horizon."""


class TooShort(StuckWalkError):
    """Trajectory too short for the requested analysis."""


class NoTheory(StuckWalkError):
    """No closed-form prediction exists for the observed window size."""


class ConstructionFailure(StuckWalkError):
    """Time-line construction failed: exact clock tie or precision exhaustion."""


class IdentityError(StuckWalkError):
    """An internal consistency identity failed beyond tolerance (numerics bug)."""
