"""Exception hierarchy shared by every ffl module."""


class FFLError(Exception):
    """Base class for all errors raised by ffl."""


class NotHermitian(FFLError, ValueError):
    pass


class NoConvergence(FFLError, ArithmeticError):
    pass


class DomainViolation(FFLError, ValueError):
    """An eigenvalue falls outside the domain of the applied scalar function."""


class NotAProjection(FFLError, ValueError):
    pass


class NotIdempotent(FFLError, ValueError):
    pass


class EpsilonNonpositive(FFLError, ValueError):
    pass


class NotEquivalent(FFLError):
    """Two projections are not Murray-von Neumann equivalent."""


class DimensionMismatch(FFLError, ValueError):
    pass


class BadRank(FFLError, ValueError):
    pass


class NonpositiveInput(FFLError, ValueError):
    pass


class NotInvertible(FFLError, ArithmeticError):
    pass


class SpectrumEscape(FFLError, ArithmeticError):
    pass


class RankMismatch(FFLError, ValueError):
    pass


class NotAnnihilating(FFLError, ValueError):
    pass


class ConfigInvalid(FFLError, ValueError):
    pass
