"""Exception types shared across the package."""


class PwlError(Exception):
    """Base class for all library-specific errors."""


class EmptyInput(PwlError):
    """A lift needs at least one marked point."""


class NonMonotone(PwlError):
    """Break points out of order, or a slope came out non-positive."""


class BackendMismatch(PwlError):
    """Mixed exact/float data, or a float fed to the exact backend."""


class Overflow(PwlError):
    """Piece count exceeded the configured cap during composition."""


class NotABreak(PwlError):
    """The marked point has equal one-sided slopes."""


class OutOfDomain(PwlError):
    """Parameters violate a family's admissibility constraints."""


class NotBracketed(PwlError):
    """The requested transition does not occur inside the given bracket."""


class RotationIrrational(PwlError):
    """No exact rational rotation number was certified within the cap."""


class NotConjugateError(PwlError):
    """Operation requires a map conjugate to a rigid rational rotation."""


class InternalMismatch(PwlError):
    """Two independent certification routes disagreed; check tolerances."""


class SegmentCollision(PwlError):
    """Adjacent landmarks sit closer than the finite-difference step."""


class LogDomain(PwlError):
    """Logarithm argument non-positive in the passage-time formula."""
