"""Clip normalization and radix-2 FFT log-spectrogram features.

The front-end is deliberately plain STFT arithmetic: 400-sample frames,
hop 160, periodic Hann window, zero-padded to a 512-point transform.
Every value is reproducible by a naive DFT, which the tests exploit.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..core.errors import ItsgwError, ShapeMismatch
from ..core.records import AudioClip

FRAME_LEN = 400
HOP_LEN = 160
FFT_SIZE = 512
N_BINS = FFT_SIZE // 2 + 1
LOG_FLOOR = 1e-10
MIN_FFT = 4
MAX_FFT = 4096


class NotPowerOfTwo(ItsgwError):
    pass


class ClipTooShort(ItsgwError):
    pass


@dataclass(frozen=True)
class FeatureSequence:
    """T x 257 log-magnitude frames plus the source length in samples."""

    frames: np.ndarray
    source_len: int

    def __post_init__(self) -> None:
        if self.frames.ndim != 2 or self.frames.shape[1] != N_BINS:
            raise ShapeMismatch(f"expected T x {N_BINS} frames, got {self.frames.shape}")
        if not np.all(np.isfinite(self.frames)):
            raise ItsgwError("non-finite feature value")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


def normalize_clip(clip: AudioClip) -> np.ndarray:
    """(x/32768 - mean) / (std + 1e-7) with population statistics."""
    if len(clip.samples) == 0:
        raise ItsgwError("cannot normalize an empty clip")
    x = np.asarray(clip.samples, dtype=np.float64) / 32768.0
    return (x - x.mean()) / (x.std() + 1e-7)


def fft_radix2(signal, n: int | None = None) -> np.ndarray:
    """Unnormalized forward DFT via iterative decimation in time.

    Accepts a 1-D signal or a stack of signals along the last axis; the
    length must be a power of two in [4, 4096].
    """
    x = np.asarray(signal, dtype=np.complex128)
    size = x.shape[-1]
    if n is None:
        n = size
    if size != n:
        raise ShapeMismatch(f"signal length {size} does not match n={n}")
    if n < MIN_FFT or n > MAX_FFT or n & (n - 1):
        raise NotPowerOfTwo(f"n must be a power of two in [{MIN_FFT}, {MAX_FFT}], got {n}")
    levels = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for bit in range(levels):
        rev |= ((idx >> bit) & 1) << (levels - 1 - bit)
    out = x[..., rev]
    lead = out.shape[:-1]
    half = 1
    while half < n:
        step = half * 2
        tw = np.exp(-2j * np.pi * np.arange(half) / step)
        blocks = out.reshape(*lead, n // step, step)
        even = blocks[..., :half]
        odd = blocks[..., half:] * tw
        out = np.concatenate([even + odd, even - odd], axis=-1).reshape(*lead, n)
        half = step
    return out


def hann_window(length: int = FRAME_LEN) -> np.ndarray:
    """Periodic Hann, the usual choice for overlapped STFT frames."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(length) / length)


def frame_count(n_samples: int) -> int:
    return (n_samples - FRAME_LEN) // HOP_LEN + 1


def log_spectrogram(signal) -> FeatureSequence:
    """ln(|STFT| + 1e-10) over bins 0..256."""
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeMismatch(f"expected a 1-D signal, got shape {x.shape}")
    if len(x) < FRAME_LEN:
        raise ClipTooShort(f"need at least {FRAME_LEN} samples, got {len(x)}")
    n_frames = frame_count(len(x))
    starts = np.arange(n_frames) * HOP_LEN
    frames = x[starts[:, None] + np.arange(FRAME_LEN)] * hann_window()
    padded = np.zeros((n_frames, FFT_SIZE))
    padded[:, :FRAME_LEN] = frames
    spectrum = fft_radix2(padded)
    magnitude = np.abs(spectrum[:, :N_BINS])
    return FeatureSequence(frames=np.log(magnitude + LOG_FLOOR), source_len=len(x))


def save_features(seq: FeatureSequence, path: str | Path) -> None:
    """Binary dump: two little-endian int32 (T, F), then row-major f64."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<ii", seq.n_frames, N_BINS))
        fh.write(seq.frames.astype("<f8").tobytes())


def load_features(path: str | Path, source_len: int = 0) -> FeatureSequence:
    raw = Path(path).read_bytes()
    t, f = struct.unpack_from("<ii", raw, 0)
    if f != N_BINS or len(raw) != 8 + t * f * 8:
        raise ShapeMismatch(f"feature dump header ({t}, {f}) disagrees with payload")
    frames = np.frombuffer(raw, dtype="<f8", offset=8).reshape(t, f).copy()
    return FeatureSequence(frames=frames, source_len=source_len)
