"""Exception hierarchy shared by all modules."""


class ToricError(Exception):
    """Base class; carries an optional witness object for reports."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class RankDeficient(ToricError):
    pass


class ConditionAViolated(ToricError):
    pass


class ConditionBViolated(ToricError):
    pass


class ConditionCViolated(ToricError):
    pass


class FanIncomplete(ToricError):
    pass


class FanNotSimplicial(ToricError):
    pass


class NotInK(ToricError):
    pass


class BasisNotFound(ToricError):
    pass


class UserBasisInvalid(ToricError):
    pass


class NotWeakFano(ToricError):
    pass


class DegreeMismatch(ToricError):
    pass


class NonIntegerChi(ToricError):
    pass


class PrecisionUnattainable(ToricError):
    pass


class UnexpectedPositivePowers(ToricError):
    pass


class AnnihilationFailure(ToricError):
    pass


class BranchUnspecified(ToricError):
    pass


class OutsideDomain(ToricError):
    pass


class CountMismatch(ToricError):
    pass


class SolverNoConvergence(ToricError):
    pass


class IdentityViolated(ToricError):
    pass


class DegeneracyWitness(ToricError):
    pass


class ToleranceUnmet(ToricError):
    pass


class InputError(ToricError):
    pass


class TruncationWarning(UserWarning):
    """A truncated series whose ratio-test tail bound exceeds the tolerance."""
