"""Exception types raised by flarespot."""


class FlareSpotError(Exception):
    """Base class for all package errors."""


class EmptyWindow(FlareSpotError, ValueError):
    pass


class OutOfBounds(FlareSpotError, IndexError):
    pass


class OutOfWindow(FlareSpotError, ValueError):
    pass


class ImageTooSmall(FlareSpotError, ValueError):
    pass


class HoleTooLarge(FlareSpotError, ValueError):
    pass


class BothEmpty(FlareSpotError, ValueError):
    pass


class SpecOutOfGamut(FlareSpotError, ValueError):
    pass


class ManifestError(FlareSpotError, ValueError):
    pass
