"""Sub-band envelope/carrier speech dereverberation.

The signal path is a 64-band QMF tree, all-pole temporal envelopes per band
(linear prediction on the DCT), a dual-path LSTM correcting the log envelope
and carrier, then resynthesis.
"""
from .estimators import DplstmDereverberator, SubbandDecomposer
from .exceptions import (DegenerateInputError, InvalidArgumentError, NonFiniteLossError,
                         ShapeMismatchError, UnsupportedFormatError)
from .sigproc import AudioSignal, SegmentGrid

__version__ = "0.1.0"

__all__ = [
    "AudioSignal", "DegenerateInputError", "DplstmDereverberator", "InvalidArgumentError",
    "NonFiniteLossError", "SegmentGrid", "ShapeMismatchError", "SubbandDecomposer",
    "UnsupportedFormatError",
]
