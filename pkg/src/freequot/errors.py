"""Exception types shared across the package."""


class FreequotError(Exception):
    """Base class for all errors raised by this package."""


class InvalidPrime(FreequotError):
    pass


class NonUnitDeterminant(FreequotError):
    pass


class PrimeMismatch(FreequotError):
    pass


class RankMismatch(FreequotError):
    pass


class IndexOutOfRange(FreequotError):
    pass


class InvalidRank(FreequotError):
    pass


class DegreeMismatch(FreequotError):
    pass


class NotGenerating(FreequotError):
    pass


class NotInTable(FreequotError):
    """Internal consistency failure: a generating tuple's class is missing."""


class ResourceLimit(FreequotError):
    pass


class TrivialWord(FreequotError):
    pass


class PrimeCeilingExceeded(FreequotError):
    """Prime search ran past its ceiling; treat as an implementation bug signal."""


class MatrixIsIdentity(FreequotError):
    pass


class InvalidGenus(FreequotError):
    pass


class GenusMismatch(FreequotError):
    pass


class InvalidOrder(FreequotError):
    pass


class NotStabilizing(FreequotError):
    """A surface map does not descend through the handlebody epimorphism.

    Carries the index (1-based) of the first meridian generator whose image
    fails to die under the epimorphism.
    """

    def __init__(self, generator_index):
        super().__init__(f"map does not stabilize the meridian kernel: b{generator_index}")
        self.generator_index = generator_index


class ValidationError(FreequotError):
    """A shipped data table failed its construction-time validation."""


class MalformedCertificate(FreequotError):
    pass
