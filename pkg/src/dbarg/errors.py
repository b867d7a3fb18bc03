"""Exception hierarchy.

Every error carries a stable machine-readable ``code`` (the class name) and an
``exit_code`` used by the command-line front end: 2 for domain errors, 3 for
convergence failures.
"""


class DbargError(Exception):
    exit_code = 1

    @property
    def code(self):
        return type(self).__name__


class DomainError(DbargError, ValueError):
    exit_code = 2


class ConvergenceError(DbargError, ArithmeticError):
    exit_code = 3


class InvalidSpec(DomainError):
    pass


class NonPositivePsi(DomainError):
    pass


class LimitUndetermined(DomainError):
    pass


class OutsideRing(DomainError):
    pass


class ZeroPoint(DomainError):
    pass


class OutsideDomain(DomainError):
    pass


class NotPeriodic(DomainError):
    pass


class NotPositive(DomainError):
    pass


class DegreeTooLarge(DomainError):
    pass


class UnsupportedProvenance(DomainError):
    pass


class DivergentSeries(ConvergenceError):
    pass


class QuadratureNoConvergence(ConvergenceError):
    pass


class NonDecayingIntegrand(ConvergenceError):
    pass


class DecayTooSlow(ConvergenceError):
    pass
