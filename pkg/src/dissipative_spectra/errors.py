"""Exception hierarchy.

Every error raised deliberately by the package derives from
:class:`SpectralError`. Input-validation problems additionally derive from
:class:`ValueError`; the "signals a bug" checks derive from
:class:`AssertionError` so they are never swallowed by ``except ValueError``.
"""


class SpectralError(Exception):
    """Base class for all package errors."""


class InvalidInput(SpectralError, ValueError):
    """Malformed input (shape, sign, missing field)."""


class NonFinite(InvalidInput):
    pass


class NonHermitianInput(InvalidInput):
    pass


class NotPositiveDefinite(InvalidInput):
    pass


class SingularBlock(SpectralError, ValueError):
    pass


class SingularSchurComplement(SpectralError, ValueError):
    pass


class NonHermitianOmega(InvalidInput):
    pass


class BNotPSD(InvalidInput):
    pass


class LossFractionViolated(InvalidInput):
    """Loss rank is 0 or N, so there is nothing to split."""


class RankDeficiencyAmbiguous(SpectralError, ValueError):
    """B has eigenvalues inside the rank guard band."""


class NotAnEigenpair(InvalidInput):
    pass


class NotDiagonalizable(SpectralError, ValueError):
    pass


class MatchingAmbiguous(SpectralError, ValueError):
    pass


class ClassificationFailed(SpectralError, ValueError):
    """Asymptotes are not yet dominant at the largest swept loss value."""


class NoMergeInBracket(SpectralError, ValueError):
    pass


class ResonantFrequency(SpectralError, ValueError):
    pass


class PhiOffDiagonalZero(InvalidInput):
    pass


class EquivalenceViolated(SpectralError, AssertionError):
    pass


class InequalityViolated(SpectralError, AssertionError):
    pass
