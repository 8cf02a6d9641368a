"""Exception types shared across the package."""


class VidtextError(Exception):
    """Base class for every error raised by this package."""


class NoFramesError(VidtextError):
    """A frame source yielded fewer than the two frames a pair needs."""


class DimensionMismatchError(VidtextError):
    """Frames or frame-derived maps of different sizes were combined."""


class DecodeError(VidtextError):
    """An image file could not be decoded."""

    def __init__(self, path, reason: str = ""):
        self.path = str(path)
        self.reason = reason
        message = f"cannot decode {self.path}"
        if reason:
            message += f": {reason}"
        super().__init__(message)


class FrameTooSmallError(VidtextError):
    """Frame is below the 3x3 minimum required by the gradient operator."""


class RectOutOfBoundsError(VidtextError):
    """A rectangle reaches outside its frame."""


class WindowExceedsSequenceError(VidtextError):
    """The temporal verification window runs past the end of the sequence."""


class CaptionOutOfBoundsError(VidtextError):
    """A synthetic caption does not fit inside the clip frame."""


class ConfigError(VidtextError):
    """A configuration value violates its documented range or invariant."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")
