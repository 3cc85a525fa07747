"""Exception types raised across the toolkit."""


class HerdSelectError(Exception):
    """Base class for all toolkit errors."""


# -- dataset --------------------------------------------------------------

class EmptyFile(HerdSelectError):
    pass


class MalformedRow(HerdSelectError):
    pass


class NonNumericCell(HerdSelectError):
    pass


class SingleClass(HerdSelectError):
    pass


class ClassTooSmall(HerdSelectError):
    pass


class EmptyMask(HerdSelectError):
    pass


# -- filters --------------------------------------------------------------

class LengthMismatch(HerdSelectError):
    pass


class EmptySet(HerdSelectError):
    pass


class BadM(HerdSelectError):
    pass


# -- classifiers ----------------------------------------------------------

class DimensionMismatch(HerdSelectError):
    pass


# -- binarize -------------------------------------------------------------

class NonFiniteVelocity(HerdSelectError):
    pass


class TooShort(HerdSelectError):
    pass


# -- stats ----------------------------------------------------------------

class BadShape(HerdSelectError):
    pass


class InconsistentRanks(HerdSelectError):
    pass
