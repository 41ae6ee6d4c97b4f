"""
Error hierarchy for the entangler package
"""


class EntanglerError(Exception):
    """Base class for every error raised by the package"""


class ContractViolation(EntanglerError, ValueError):
    """A precondition of an operation does not hold"""


class InvalidStateError(ContractViolation):
    """A matrix does not satisfy the density-matrix invariants"""


class ScheduleError(ContractViolation):
    """Refocusing schedule violates 2*J*tau1 - J*tau2 = pi"""


class HarmonicFitError(EntanglerError):
    """Evaluator is not a band-limited trigonometric polynomial in its angle"""


class ConfigurationError(EntanglerError, ValueError):
    """Scenario, grid or settings values are inconsistent"""


class NoSignChangeError(EntanglerError):
    """Bisection bracket does not straddle an entanglement transition"""

    def __init__(self, message: str, lo_entangled: bool, hi_entangled: bool):
        super().__init__(message)
        self.lo_entangled = lo_entangled
        self.hi_entangled = hi_entangled


class UsageError(EntanglerError):
    """Command line could not be parsed"""
