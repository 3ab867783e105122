"""Exception hierarchy shared by every module of the package."""


class Mp3SpliceError(Exception):
    """Base class for all domain errors raised by mp3splice."""


# -- bitstream ---------------------------------------------------------------

class BitstreamError(Mp3SpliceError):
    pass


class NoFramesFound(BitstreamError):
    pass


class UnsupportedFormat(BitstreamError):
    pass


class TruncatedFrame(BitstreamError):
    pass


class ReservedValue(BitstreamError):
    pass


class BitUnderflow(BitstreamError):
    pass


class InvalidCodeword(BitstreamError):
    pass


class ReservoirUnderflow(BitstreamError):
    """main_data_begin points before the first byte of buffered main data."""


# -- features / model / training ---------------------------------------------

class UnusableRecord(Mp3SpliceError):
    pass


class ShapeMismatch(Mp3SpliceError, ValueError):
    pass


class NonFiniteLoss(Mp3SpliceError, FloatingPointError):
    pass


class EmptyDataset(Mp3SpliceError):
    pass


class FileFormatError(Mp3SpliceError):
    """A cache, weight or manifest file is malformed or has the wrong version."""


# -- forge -------------------------------------------------------------------

class SourceTooShort(Mp3SpliceError):
    pass


class EncoderFailure(Mp3SpliceError):
    pass


class FrameCountMismatch(Mp3SpliceError):
    pass


# -- metrics / localization --------------------------------------------------

class LengthMismatch(Mp3SpliceError, ValueError):
    pass


class FileTooShort(Mp3SpliceError):
    pass
