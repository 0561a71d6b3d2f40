"""Exception hierarchy shared by all modules."""


class ProdConcError(Exception):
    """Base class for every error raised by this package."""


class NotAProbability(ProdConcError):
    pass


class InvalidParameter(ProdConcError, ValueError):
    pass


class InvalidP(InvalidParameter):
    pass


class EmptyCoordSet(ProdConcError, ValueError):
    pass


class IndexOutOfRange(ProdConcError, IndexError):
    pass


class TooLargeToEnumerate(ProdConcError):
    pass


class SpaceMismatch(ProdConcError, ValueError):
    pass


class NonIncreasingCuts(ProdConcError, ValueError):
    pass


class NotAnIndicator(ProdConcError, ValueError):
    pass


class PreconditionViolated(ProdConcError):
    pass


class InternalContradiction(ProdConcError):
    """A search that is guaranteed to succeed did not; signals numerical failure."""


class UniversalityFailed(ProdConcError):
    pass


class ParseError(ProdConcError, ValueError):
    pass
