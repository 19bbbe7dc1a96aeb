"""Exception types raised by the library.

All of them derive from :class:`GkpError`, which itself is a ``ValueError`` so
callers validating user input can catch either.
"""


class GkpError(ValueError):
    """Base class for every error raised by this package."""


class NonSymplectic(GkpError):
    pass


class NotFactorizable(GkpError):
    pass


class BadFactors(GkpError):
    pass


class NotCoprime(GkpError):
    pass


class NotFound(GkpError):
    """No rational approximation exists below the requested denominator bound."""


class GainUndefined(GkpError):
    pass


class ZeroCoupling(GkpError):
    pass


class TraceNotOne(GkpError):
    pass


class NotDensityMatrix(GkpError):
    pass


class CutoffTooSmall(GkpError):
    pass


class EnvelopeMismatch(GkpError):
    pass


class BasisDegenerate(GkpError):
    pass


class RankCollapse(GkpError):
    """The channel output is supported on fewer dimensions than the code."""


class NoSolution(GkpError):
    pass
