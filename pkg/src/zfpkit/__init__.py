"""zfpkit: fixed-precision block-transform compression with verified error bounds."""

from . import bitvec, bounds, codec, experiments
from .codec import CodecParams, compress, decompress

__version__ = "0.1.0"

__all__ = [
    "CodecParams",
    "__version__",
    "bitvec",
    "bounds",
    "codec",
    "compress",
    "decompress",
    "experiments",
]
