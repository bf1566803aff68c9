"""Exception types shared across the package."""


class BranchcritError(Exception):
    """Base class for all package errors."""


class AbsentEntry(BranchcritError):
    pass


class InvalidInstance(BranchcritError):
    pass


class ColumnOutOfRange(BranchcritError):
    pass


class CriterionFails(BranchcritError):
    pass


class BadRectangle(BranchcritError):
    pass


class ComparablePairInStripe(BranchcritError):
    pass


class NotAntichain(BranchcritError):
    pass


class NegativeExponent(BranchcritError):
    pass


class BadIndices(BranchcritError):
    pass


class NotDivisible(BranchcritError):
    pass


class UnassignedVariable(BranchcritError):
    pass


class NonIntegralResult(BranchcritError):
    pass


class InvalidSpec(BranchcritError):
    pass


class DenominatorSurvived(BranchcritError):
    pass


class NotFull(BranchcritError):
    pass


class DGreaterEqualP(InvalidInstance):
    pass


class NotDominant(InvalidInstance):
    pass


class MixedWeights(BranchcritError):
    pass


class IdentityFailed(BranchcritError):
    pass
