"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    """An argument has the wrong shape, range or type."""


class ShapeMismatchError(InvalidArgumentError):
    """Arrays or signals that must agree in shape or length do not."""


class DegenerateInputError(ValueError):
    """Input carries no usable signal (e.g. all zeros or silence)."""


class UnsupportedFormatError(ValueError):
    """Audio file is not 16 kHz mono PCM16/float32 WAV."""


class NonFiniteLossError(RuntimeError):
    """Training produced a NaN or infinite loss."""
