"""Exception hierarchy shared by every module.

``CodecError`` is the base for all data-dependent failures; the CLI maps it
to exit code 2. Argument-shaped errors also derive from ``ValueError`` so
library callers can catch them generically.
"""


class CodecError(Exception):
    """Base class for all codec failures."""


class DimensionMismatch(CodecError, ValueError):
    """Two grids or images that must share dimensions do not."""


class RoiDimensionMismatch(DimensionMismatch):
    """Supplied ROI grid does not match the token-map dimensions."""


class AlphabetMismatch(CodecError, ValueError):
    """Token alphabet sizes disagree between inputs."""


class ImageTooSmall(CodecError, ValueError):
    """Image is smaller than one patch in some dimension."""


class TooFewPatches(CodecError, ValueError):
    """Training corpus has fewer distinct patches than requested clusters."""


class MaskPresent(CodecError, ValueError):
    """Operation requires a token map without mask cells."""


class IndexOutOfRange(CodecError, ValueError):
    """Token index exceeds the codebook size."""


class CausalityViolation(CodecError):
    """A context slot referenced a position that has not been coded yet."""


class CorruptModel(CodecError):
    """Model or codebook byte stream is malformed or truncated."""


class CorruptRegion(CodecError):
    """Region payload failed checksum or length validation."""


class CorruptContainer(CodecError):
    """Container byte stream is malformed or truncated."""


class IdMismatch(CodecError):
    """Embedded content id does not match the supplied codebook or model."""


class PayloadUnderrun(CodecError):
    """Range decoder ran past the end of the token payload."""


class ImageFormatError(CodecError, ValueError):
    """PPM/PGM stream is not a supported 8/16-bit binary netpbm file."""
