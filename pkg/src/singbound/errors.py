"""Exception types shared across the package."""


class SingboundError(Exception):
    """Base class for all domain errors raised by this package."""


class DomainError(SingboundError, ValueError):
    pass


class PrecisionError(SingboundError):
    """A certified enclosure could not reach the requested tolerance."""


class ResourceError(SingboundError):
    """A computation would exceed its configured enumeration budget."""


class UnsupportedExponent(SingboundError):
    pass


class Infeasible(SingboundError):
    pass


class BadPrime(SingboundError, ValueError):
    pass


class DependentFixedRows(SingboundError):
    pass


class NegativeBase(SingboundError):
    pass


class NotMember(SingboundError, KeyError):
    pass


class AlreadySpanning(SingboundError):
    pass
