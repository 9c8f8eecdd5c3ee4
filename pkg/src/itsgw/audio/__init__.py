"""WAV ingestion, spectrogram features, and batch collation."""

from .collate import CollatedBatch, collate_batch, padding_ratio
from .features import (
    FFT_SIZE,
    FRAME_LEN,
    HOP_LEN,
    LOG_FLOOR,
    N_BINS,
    ClipTooShort,
    FeatureSequence,
    NotPowerOfTwo,
    fft_radix2,
    frame_count,
    hann_window,
    load_features,
    log_spectrogram,
    normalize_clip,
    save_features,
)
from .wav import (
    MalformedHeader,
    UnsupportedBitDepth,
    UnsupportedChannels,
    UnsupportedRate,
    load_wav,
)

__all__ = [
    "FFT_SIZE",
    "FRAME_LEN",
    "HOP_LEN",
    "LOG_FLOOR",
    "N_BINS",
    "ClipTooShort",
    "CollatedBatch",
    "FeatureSequence",
    "MalformedHeader",
    "NotPowerOfTwo",
    "UnsupportedBitDepth",
    "UnsupportedChannels",
    "UnsupportedRate",
    "collate_batch",
    "fft_radix2",
    "frame_count",
    "hann_window",
    "load_features",
    "load_wav",
    "log_spectrogram",
    "normalize_clip",
    "padding_ratio",
    "save_features",
]
