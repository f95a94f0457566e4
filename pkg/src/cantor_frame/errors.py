class CantorFrameError(Exception):
    """Base class for errors raised by this package."""


class SizeLimitError(CantorFrameError, ValueError):
    """Requested depth exceeds the cap of a dense construction."""


class NonConvergence(CantorFrameError, RuntimeError):
    """The Jacobi eigensolver did not reach its off-diagonal tolerance."""


class BracketFailure(CantorFrameError, RuntimeError):
    """The secular function has no sign change across the search bracket."""


class CertificationError(CantorFrameError, AssertionError):
    """A computed quantity fell outside its certified error envelope."""
